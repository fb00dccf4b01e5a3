#pragma once

#include <cmath>
#include <stdexcept>

namespace bqr {

// Quantile level tau, restricted to the open interval (0, 1). Validated once
// at construction; everything downstream assumes a valid value and never
// re-checks it.
class QuantileLevel {
 public:
  explicit QuantileLevel(double tau) : tau_(tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument("QuantileLevel: tau must lie strictly in (0, 1)");
    }
  }
  double value() const noexcept { return tau_; }

 private:
  double tau_;
};

// Asymmetric Laplace parameters. The location mu is the tau-quantile of the
// distribution; sigma is the scale.
struct AldParams {
  double mu;
  double sigma;
  QuantileLevel tau;

  AldParams(double mu_in, double sigma_in, QuantileLevel tau_in)
      : mu(mu_in), sigma(sigma_in), tau(tau_in) {
    if (!(sigma > 0.0)) {
      throw std::invalid_argument("AldParams: sigma must be positive");
    }
  }
};

// Constants of the normal/exponential mixture representation:
//   Y | v ~ N(mu + theta v, psi2 sigma v),  v ~ Exponential(mean sigma).
struct MixtureConstants {
  double theta;
  double psi2;
};

// Check loss rho_tau(u) = u (tau - 1{u < 0}). Nonnegative, zero only at u = 0.
inline double check_loss(double u, QuantileLevel tau) noexcept {
  const double t = tau.value();
  return u < 0.0 ? u * (t - 1.0) : u * t;
}

// log f(y | mu, sigma, tau) = log(tau (1 - tau) / sigma) - rho_tau((y - mu) / sigma).
inline double ald_log_density(double y, const AldParams& p) noexcept {
  const double t = p.tau.value();
  return std::log(t * (1.0 - t) / p.sigma) - check_loss((y - p.mu) / p.sigma, p.tau);
}

inline MixtureConstants mixture_constants(QuantileLevel tau) noexcept {
  const double t = tau.value();
  const double denom = t * (1.0 - t);
  return {(1.0 - 2.0 * t) / denom, 2.0 / denom};
}

// E(Y) = mu + sigma (1 - 2 tau) / (tau (1 - tau)).
inline double ald_mean(const AldParams& p) noexcept {
  return p.mu + p.sigma * mixture_constants(p.tau).theta;
}

// T(tau) = (1 - 2 tau + 2 tau^2) / ((1 - tau)^2 tau^2), so that
// Var(Y) = sigma^2 T(tau). U-shaped with minimum 8 at tau = 1/2.
inline double variance_factor(QuantileLevel tau) noexcept {
  const double t = tau.value();
  const double omt = 1.0 - t;
  return (1.0 - 2.0 * t + 2.0 * t * t) / (omt * omt * t * t);
}

}  // namespace bqr
