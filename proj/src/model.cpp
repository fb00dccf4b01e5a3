#include "bqr/model.hpp"

#include <stdexcept>

namespace bqr {

void Dataset::validate() const {
  const Eigen::Index nn = n();
  const Eigen::Index pp = p();
  if (pp < 1) throw std::invalid_argument("Dataset: need at least one design column");
  if (nn < pp) throw std::invalid_argument("Dataset: need n >= p observations");
  if (X.rows() != nn) throw std::invalid_argument("Dataset: y and X row counts differ");
  if (static_cast<Eigen::Index>(column_names.size()) != pp) {
    throw std::invalid_argument("Dataset: one name per design column required");
  }
  if (!y.allFinite() || !X.allFinite()) {
    throw std::invalid_argument("Dataset: NaN or infinite entry");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < pp) {
    throw std::invalid_argument("Dataset: design matrix is rank deficient (pivot tolerance 1e-10)");
  }
}

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X, std::vector<std::string> column_names) {
  Dataset data{std::move(y), std::move(X), std::move(column_names)};
  data.validate();
  return data;
}

PriorSpec PriorSpec::defaults(Eigen::Index p) {
  PriorSpec prior;
  prior.beta_mean = Eigen::VectorXd::Zero(p);
  prior.beta_cov = 100.0 * Eigen::MatrixXd::Identity(p, p);
  prior.sigma_shape = 1.5;
  prior.sigma_rate = 0.05;
  return prior;
}

void PriorSpec::validate(Eigen::Index p) const {
  if (beta_mean.size() != p || beta_cov.rows() != p || beta_cov.cols() != p) {
    throw std::invalid_argument("PriorSpec: dimensions do not match the design");
  }
  if (!beta_cov.isApprox(beta_cov.transpose(), 1e-12)) {
    throw std::invalid_argument("PriorSpec: beta_cov must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(beta_cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("PriorSpec: beta_cov must be positive definite");
  }
  if (!(sigma_shape > 0.0 && sigma_rate > 0.0)) {
    throw std::invalid_argument("PriorSpec: sigma hyperparameters must be positive");
  }
}

void FitConfig::validate(Eigen::Index p) const {
  if (iterations <= 0) throw std::invalid_argument("FitConfig: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) {
    throw std::invalid_argument("FitConfig: burn_in must satisfy 0 <= burn_in < iterations");
  }
  if (thin < 1) throw std::invalid_argument("FitConfig: thin must be >= 1");
  if (retained() < 100) {
    throw std::invalid_argument("FitConfig: fewer than 100 retained draws; increase iterations");
  }
  prior.validate(p);
}

}  // namespace bqr
