#include "bqr/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bqr {

namespace {

// SplitMix64 finalizer; decorrelates nearby integer inputs.
std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix64(mix64(seed) ^ mix64(~stream_id))) {}

std::uint64_t RngStream::derive(std::uint64_t child_id) const noexcept {
  return mix64(mix64(seed_) ^ mix64(~stream_id_) ^ mix64(child_id * 0x9e3779b97f4a7c15ULL + 1));
}

double RngStream::uniform01() {
  // 53-bit mantissa shifted to the open interval: ((x >> 11) + 0.5) * 2^-53.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::exponential(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("exponential: mean must be positive");
  return -mean * std::log(uniform01());
}

double RngStream::gamma(double shape, double scale) {
  if (!(shape > 0.0 && scale > 0.0)) throw std::invalid_argument("gamma: parameters must be positive");
  std::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

double sample_inverse_gaussian(double mean, double shape, RngStream& rng) {
  if (!(mean > 0.0 && shape > 0.0)) {
    throw std::invalid_argument("sample_inverse_gaussian: mean and shape must be positive");
  }
  const double nu = rng.normal();
  const double y = nu * nu;
  const double t = mean * y / (2.0 * shape);
  // Equivalent to mean (1 + t - sqrt(t (t + 2))) but free of cancellation.
  const double x = mean / (1.0 + t + std::sqrt(t * (t + 2.0)));
  const double u = rng.uniform01();
  return u <= mean / (mean + x) ? x : mean * mean / x;
}

double sample_inverse_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0 && rate > 0.0)) {
    throw std::invalid_argument("sample_inverse_gamma: shape and rate must be positive");
  }
  double g = 0.0;
  do {
    g = rng.gamma(shape, 1.0 / rate);
  } while (!(g > 0.0));
  return 1.0 / g;
}

double sample_gig_half(const GigHalfParams& params, RngStream& rng) {
  if (params.delta2 == 0.0) {
    // Kernel reduces to v^{-1/2} exp{-zeta2 v / 2}.
    double g = 0.0;
    do {
      g = rng.gamma(0.5, 2.0 / params.zeta2);
    } while (!(g > 0.0 && std::isfinite(g)));
    return g;
  }
  const double delta = std::sqrt(params.delta2);
  const double zeta = std::sqrt(params.zeta2);
  double w = 0.0;
  do {
    w = sample_inverse_gaussian(zeta / delta, params.zeta2, rng);
  } while (!(w > 0.0 && std::isfinite(w)));
  return 1.0 / w;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance_factor,
                           RngStream& rng) {
  const Eigen::Index p = mean.size();
  if (covariance_factor.rows() != p || covariance_factor.cols() != p) {
    throw std::invalid_argument("sample_mvn: factor dimensions do not match the mean");
  }
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z[i] = rng.normal();
  return mean + covariance_factor.triangularView<Eigen::Lower>() * z;
}

}  // namespace bqr
