#include "bqr/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bqr/stats.hpp"

namespace bqr {

namespace {

struct BetaConditionalFactor {
  Eigen::VectorXd mean;
  Eigen::LLT<Eigen::MatrixXd> precision_llt;
};

// Assembles and factors the beta full-conditional precision. Shared by the
// public accessor (which materializes the covariance) and the sweep (which
// draws through the factor without inverting).
BetaConditionalFactor beta_conditional_factor(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                              const Eigen::VectorXd& v, double sigma,
                                              const FitConfig& config,
                                              const Eigen::MatrixXd& prior_precision,
                                              const Eigen::VectorXd& prior_precision_mean) {
  const Eigen::Index n = y.size();
  const Eigen::Index p = X.cols();
  const MixtureConstants mc = mixture_constants(config.tau);

  Eigen::MatrixXd precision = prior_precision;
  Eigen::VectorXd rhs = prior_precision_mean;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = 1.0 / (mc.psi2 * sigma * v[i]);
    precision.noalias() += w * (X.row(i).transpose() * X.row(i));
    rhs.noalias() += w * (y[i] - mc.theta * v[i]) * X.row(i).transpose();
  }

  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success || !precision.allFinite() || !rhs.allFinite()) {
    std::ostringstream msg;
    msg << "full_conditional_beta: precision matrix is numerically singular"
        << " (p = " << p << ", v range [" << v.minCoeff() << ", " << v.maxCoeff()
        << "], sigma = " << sigma << ")";
    throw std::runtime_error(msg.str());
  }
  return {llt.solve(rhs), std::move(llt)};
}

Eigen::MatrixXd prior_precision_of(const PriorSpec& prior) {
  Eigen::LLT<Eigen::MatrixXd> llt(prior.beta_cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("PriorSpec: beta_cov must be positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(prior.beta_cov.rows(), prior.beta_cov.cols()));
}

ParamSummary summarize_column(std::vector<double>& draws, double credible_level) {
  const double m = mean(draws);
  std::sort(draws.begin(), draws.end());
  const double alpha = (1.0 - credible_level) / 2.0;
  return {m, quantile_sorted(draws, 0.5), quantile_sorted(draws, alpha),
          quantile_sorted(draws, 1.0 - alpha)};
}

}  // namespace

BetaFullConditional full_conditional_beta(const Dataset& data, const Eigen::VectorXd& v,
                                          double sigma, const FitConfig& config) {
  const Eigen::MatrixXd prior_precision = prior_precision_of(config.prior);
  const Eigen::VectorXd prior_rhs = prior_precision * config.prior.beta_mean;
  BetaConditionalFactor fc =
      beta_conditional_factor(data.y, data.X, v, sigma, config, prior_precision, prior_rhs);
  const Eigen::Index p = data.p();
  return {std::move(fc.mean), fc.precision_llt.solve(Eigen::MatrixXd::Identity(p, p))};
}

InvGammaParams full_conditional_sigma_params(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& beta, const Eigen::VectorXd& v,
                                             const FitConfig& config) {
  const Eigen::Index n = y.size();
  const MixtureConstants mc = mixture_constants(config.tau);
  double rate = config.prior.sigma_rate;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double resid = y[i] - X.row(i).dot(beta) - mc.theta * v[i];
    rate += resid * resid / (2.0 * mc.psi2 * v[i]) + v[i];
  }
  return {config.prior.sigma_shape + 1.5 * static_cast<double>(n), rate};
}

InvGammaParams full_conditional_sigma_params(const Dataset& data, const Eigen::VectorXd& beta,
                                             const Eigen::VectorXd& v, const FitConfig& config) {
  return full_conditional_sigma_params(data.y, data.X, beta, v, config);
}

GigHalfParams full_conditional_v_params(double y_i, const Eigen::VectorXd& x_i,
                                        const Eigen::VectorXd& beta, double sigma,
                                        QuantileLevel tau) {
  const MixtureConstants mc = mixture_constants(tau);
  const double resid = y_i - x_i.dot(beta);
  return GigHalfParams(resid * resid / (mc.psi2 * sigma),
                       2.0 / sigma + mc.theta * mc.theta / (mc.psi2 * sigma));
}

PosteriorChains run_gibbs(const Dataset& data, const FitConfig& config) {
  data.validate();
  config.validate(data.p());

  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const MixtureConstants mc = mixture_constants(config.tau);
  const Eigen::MatrixXd prior_precision = prior_precision_of(config.prior);
  const Eigen::VectorXd prior_rhs = prior_precision * config.prior.beta_mean;

  // Least-squares start: beta at the LS solution, sigma at the mean absolute
  // residual, v at the absolute residuals floored at 0.01.
  Eigen::VectorXd beta = data.X.colPivHouseholderQr().solve(data.y);
  Eigen::VectorXd resid = data.y - data.X * beta;
  double sigma = std::max(resid.cwiseAbs().mean(), 1e-8);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::max(std::abs(resid[i]), 0.01);

  const int retained = config.retained();
  PosteriorChains chains{Eigen::MatrixXd(retained, p), Eigen::VectorXd(retained),
                         Eigen::MatrixXd(retained, n), config.tau};

  RngStream rng(config.seed, 0);
  Eigen::VectorXd z(p);
  int stored = 0;
  for (int iter = 1; iter <= config.iterations; ++iter) {
    // v block
    const double zeta2 = 2.0 / sigma + mc.theta * mc.theta / (mc.psi2 * sigma);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = data.y[i] - data.X.row(i).dot(beta);
      v[i] = sample_gig_half(GigHalfParams(r * r / (mc.psi2 * sigma), zeta2), rng);
    }

    // beta block: with precision P = L L', mean + L^{-T} z has covariance P^{-1}.
    try {
      BetaConditionalFactor fc =
          beta_conditional_factor(data.y, data.X, v, sigma, config, prior_precision, prior_rhs);
      for (Eigen::Index k = 0; k < p; ++k) z[k] = rng.normal();
      beta = fc.mean + fc.precision_llt.matrixU().solve(z);
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("run_gibbs: sweep " + std::to_string(iter) + ": " + err.what());
    }

    // sigma block
    const InvGammaParams ig = full_conditional_sigma_params(data.y, data.X, beta, v, config);
    sigma = sample_inverse_gamma(ig.shape, ig.rate, rng);

    if (iter > config.burn_in && (iter - config.burn_in) % config.thin == 0 && stored < retained) {
      chains.beta.row(stored) = beta;
      chains.sigma[stored] = sigma;
      chains.v.row(stored) = v;
      ++stored;
    }
  }
  return chains;
}

ChainSummary summarize_chains(const PosteriorChains& chains, double credible_level) {
  if (chains.retained() < 1) throw std::invalid_argument("summarize_chains: empty chains");
  if (!(credible_level > 0.0 && credible_level < 1.0)) {
    throw std::invalid_argument("summarize_chains: credible_level must lie in (0, 1)");
  }
  ChainSummary summary;
  summary.credible_level = credible_level;
  const Eigen::Index m = chains.retained();
  std::vector<double> draws(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < chains.n_coef(); ++j) {
    for (Eigen::Index l = 0; l < m; ++l) draws[static_cast<std::size_t>(l)] = chains.beta(l, j);
    summary.beta.push_back(summarize_column(draws, credible_level));
  }
  for (Eigen::Index l = 0; l < m; ++l) draws[static_cast<std::size_t>(l)] = chains.sigma[l];
  summary.sigma = summarize_column(draws, credible_level);
  return summary;
}

}  // namespace bqr
