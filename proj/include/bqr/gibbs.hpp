#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bqr/model.hpp"
#include "bqr/rng.hpp"

namespace bqr {

// Mean and covariance of the normal full conditional of beta given the
// latent variables and sigma. The covariance is the inverse of
//   B0^{-1} + sum_i x_i x_i' / (psi2 sigma v_i),
// computed through its Cholesky factorization. Throws std::runtime_error
// (reporting the v range) when the precision matrix is numerically singular.
struct BetaFullConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

BetaFullConditional full_conditional_beta(const Dataset& data, const Eigen::VectorXd& v,
                                          double sigma, const FitConfig& config);

// Inverse-gamma parameters of the sigma full conditional:
//   shape = prior_shape + 3n/2
//   rate  = prior_rate + sum_i (y_i - x_i'beta - theta v_i)^2 / (2 psi2 v_i) + sum_i v_i.
// The normal likelihood contributes n/2 to the shape and the exponential
// mixing law the remaining n. An empty (n = 0) input returns the prior
// parameters unchanged.
struct InvGammaParams {
  double shape;
  double rate;
};

InvGammaParams full_conditional_sigma_params(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& beta, const Eigen::VectorXd& v,
                                             const FitConfig& config);
InvGammaParams full_conditional_sigma_params(const Dataset& data, const Eigen::VectorXd& beta,
                                             const Eigen::VectorXd& v, const FitConfig& config);

// GIG(1/2) parameters of one latent variable:
//   delta_i^2 = (y_i - x_i'beta)^2 / (psi2 sigma),  zeta^2 = 2/sigma + theta^2/(psi2 sigma).
GigHalfParams full_conditional_v_params(double y_i, const Eigen::VectorXd& x_i,
                                        const Eigen::VectorXd& beta, double sigma,
                                        QuantileLevel tau);

// Runs the three-block sweep (v, then beta, then sigma) from least-squares
// starting values and stores every thin-th post-burn-in state. Deterministic
// given config.seed. A single call is strictly sequential; run distinct
// calls concurrently with distinct seeds if needed.
PosteriorChains run_gibbs(const Dataset& data, const FitConfig& config);

struct ParamSummary {
  double mean;
  double median;
  double lower;
  double upper;
};

struct ChainSummary {
  std::vector<ParamSummary> beta;
  ParamSummary sigma;
  double credible_level;
};

// Posterior mean/median and the equal-tailed credible interval from the
// empirical type-7 chain quantiles.
ChainSummary summarize_chains(const PosteriorChains& chains, double credible_level);

}  // namespace bqr
