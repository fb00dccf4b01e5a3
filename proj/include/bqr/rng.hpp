#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace bqr {

// Seeded pseudo-random stream. A stream is fully determined by the pair
// (seed, stream_id): the same pair reproduces the same draw sequence
// bit-for-bit on a given build. Streams are cheap; give every chain,
// replication and worker its own substream derived from one master seed
// instead of sharing a stream across threads. A stream is single-owner and
// must not be used concurrently.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Deterministic seed for a child stream; collisions between distinct
  // (seed, stream_id, child_id) triples are astronomically unlikely.
  std::uint64_t derive(std::uint64_t child_id) const noexcept;
  RngStream substream(std::uint64_t child_id) const { return RngStream(derive(child_id), child_id); }

  std::uint64_t next_u64() { return engine_(); }

  // Strictly inside (0, 1); never returns an endpoint.
  double uniform01();
  // Standard normal (Box-Muller, no cached second variate).
  double normal();
  // Exponential with the given mean (not rate).
  double exponential(double mean);
  // Gamma with shape/scale parameterization.
  double gamma(double shape, double scale);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// Parameters of the latent-variable full conditional: the generalized
// inverse Gaussian kernel v^{nu-1} exp{-(delta2 / v + zeta2 v) / 2} with
// nu fixed at 1/2. delta2 is the weighted squared residual and may be zero;
// zeta2 is shared across observations and strictly positive.
struct GigHalfParams {
  double delta2;
  double zeta2;

  GigHalfParams(double delta2_in, double zeta2_in) : delta2(delta2_in), zeta2(zeta2_in) {
    if (!(delta2 >= 0.0)) throw std::invalid_argument("GigHalfParams: delta2 must be >= 0");
    if (!(zeta2 > 0.0)) throw std::invalid_argument("GigHalfParams: zeta2 must be positive");
  }
};

// Inverse Gaussian IG(mean, shape) via the Michael-Schucany-Haas transform,
// in the cancellation-free form x = mean / (1 + t + sqrt(t (t + 2))) with
// t = mean y / (2 shape), y a squared standard normal.
double sample_inverse_gaussian(double mean, double shape, RngStream& rng);

// Inverse gamma with density proportional to x^{-shape-1} exp{-rate / x};
// for shape > 1 the mean is rate / (shape - 1).
double sample_inverse_gamma(double shape, double rate, RngStream& rng);

// GIG with index 1/2. Uses the reciprocal identity: if W is inverse Gaussian
// with mean zeta/delta and shape zeta2, then 1/W has the target kernel.
// delta2 == 0 falls back to the exact Gamma(1/2, rate zeta2/2) special case.
// Never returns 0, NaN or infinity.
double sample_gig_half(const GigHalfParams& params, RngStream& rng);

// mean + factor * z with z i.i.d. standard normal; factor is the lower
// Cholesky factor of the desired covariance.
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance_factor,
                           RngStream& rng);

}  // namespace bqr
