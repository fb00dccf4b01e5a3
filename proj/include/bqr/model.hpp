#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bqr/ald.hpp"

namespace bqr {

// Regression data: response y and design matrix X with one label per column.
// When an intercept is requested the first column is all ones. Validation
// happens once, at assembly: finite entries, n >= p >= 1, and full column
// rank judged by a rank-revealing QR with relative pivot tolerance 1e-10.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> column_names;

  Eigen::Index n() const noexcept { return y.size(); }
  Eigen::Index p() const noexcept { return X.cols(); }

  // Throws std::invalid_argument describing the first violated requirement.
  void validate() const;
};

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> column_names);

// Conjugate priors: beta ~ N(beta_mean, beta_cov), sigma ~ IG(shape, rate).
struct PriorSpec {
  Eigen::VectorXd beta_mean;
  Eigen::MatrixXd beta_cov;
  double sigma_shape = 1.5;
  double sigma_rate = 0.05;

  // N(0, 100 I) and IG(3/2, 0.1/2).
  static PriorSpec defaults(Eigen::Index p);

  void validate(Eigen::Index p) const;
};

struct FitConfig {
  QuantileLevel tau{0.5};
  int iterations = 3000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
  PriorSpec prior;

  int retained() const noexcept { return (iterations - burn_in) / thin; }

  // Requires 0 <= burn_in < iterations, thin >= 1, at least 100 retained
  // draws, and a prior matching the design dimension.
  void validate(Eigen::Index p) const;
};

// Post-burn-in, thinned draws. beta is M x p, v is M x n (one latent
// variable per observation), sigma has length M. Immutable after the fit;
// safe to share read-only across threads.
struct PosteriorChains {
  Eigen::MatrixXd beta;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
  QuantileLevel tau{0.5};

  Eigen::Index retained() const noexcept { return sigma.size(); }
  Eigen::Index n_obs() const noexcept { return v.cols(); }
  Eigen::Index n_coef() const noexcept { return beta.cols(); }
};

}  // namespace bqr
