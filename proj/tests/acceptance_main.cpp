// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bqr/csv.hpp"
#include "bqr/gibbs.hpp"
#include "bqr/outlier.hpp"
#include "bqr/rng.hpp"
#include "bqr/sim.hpp"
#include "bqr/stats.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  explicit Check(std::string label) : label_(std::move(label)) {}

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!detail_.empty()) detail_ += "; ";
      detail_ += "FAILED " + what;
    } else {
      if (!detail_.empty()) detail_ += "; ";
      detail_ += what;
    }
  }

  Outcome outcome() const { return {pass_, detail_}; }

 private:
  std::string label_;
  bool pass_ = true;
  std::string detail_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

bqr::Dataset line_data(Eigen::Index n, double intercept, double slope, std::uint64_t seed) {
  bqr::RngStream rng(seed);
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = -5.0 + 10.0 * rng.uniform01();
    X(i, 0) = 1.0;
    X(i, 1) = x;
    y[i] = intercept + slope * x + rng.normal();
  }
  return bqr::make_dataset(std::move(y), std::move(X), {"intercept", "x"});
}

bqr::FitConfig default_config(double tau, Eigen::Index p, std::uint64_t seed) {
  bqr::FitConfig config;
  config.tau = bqr::QuantileLevel(tau);
  config.seed = seed;
  config.prior = bqr::PriorSpec::defaults(p);
  return config;
}

// ---------------------------------------------------------------------------

Outcome criterion_sampler_ground_truth() {
  Check check("sampler");
  const bqr::Dataset data = line_data(2000, 1.0, 2.0, 8101);
  const double z90 = 1.2815515655446004;
  const struct {
    double tau, intercept;
  } cases[] = {{0.1, 1.0 - z90}, {0.5, 1.0}, {0.9, 1.0 + z90}};
  for (const auto& c : cases) {
    const auto start = std::chrono::steady_clock::now();
    const bqr::PosteriorChains chains = bqr::run_gibbs(data, default_config(c.tau, 2, 8102));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Eigen::VectorXd beta_hat = chains.beta.colwise().mean();
    check.require(std::abs(beta_hat[0] - c.intercept) <= 0.1,
                  "tau=" + fmt(c.tau) + " intercept " + fmt(beta_hat[0]) + " vs " + fmt(c.intercept));
    check.require(std::abs(beta_hat[1] - 2.0) <= 0.05, "slope " + fmt(beta_hat[1]));
    check.require(seconds < 30.0, "fit time " + fmt(seconds) + "s < 30s");
  }
  return check.outcome();
}

Outcome criterion_mh_oracle() {
  Check check("oracle");
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> y{1.1, 2.6, 2.8, 4.3, 5.1};
  const double tau = 0.3;

  Eigen::MatrixXd X(5, 1);
  Eigen::VectorXd yv(5);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = x[static_cast<std::size_t>(i)];
    yv[i] = y[static_cast<std::size_t>(i)];
  }
  const bqr::Dataset data = bqr::make_dataset(yv, X, {"x"});
  bqr::FitConfig config = default_config(tau, 1, 8201);
  config.iterations = 120000;
  config.burn_in = 20000;
  const bqr::PosteriorChains chains = bqr::run_gibbs(data, config);

  std::vector<double> beta_chain(chains.beta.col(0).data(),
                                 chains.beta.col(0).data() + chains.retained());
  std::vector<double> sigma_chain(chains.sigma.data(), chains.sigma.data() + chains.retained());
  const double gb = bqr::mean(beta_chain), gs = bqr::mean(sigma_chain);
  const double gb_se = oracle::batch_means_mcse(beta_chain);
  const double gs_se = oracle::batch_means_mcse(sigma_chain);

  const oracle::MhResult mh = oracle::mh_ald_posterior(y, x, tau, 100.0, 1.5, 0.05, 2000000, 200000, 8202);
  const double beta_tol = 3.0 * std::sqrt(gb_se * gb_se + mh.beta_mcse * mh.beta_mcse);
  const double sigma_tol = 3.0 * std::sqrt(gs_se * gs_se + mh.sigma_mcse * mh.sigma_mcse);
  check.require(std::abs(gb - mh.beta_mean) < beta_tol,
                "beta " + fmt(gb) + " vs MH " + fmt(mh.beta_mean) + " (3 SE = " + fmt(beta_tol) + ")");
  check.require(std::abs(gs - mh.sigma_mean) < sigma_tol,
                "sigma " + fmt(gs) + " vs MH " + fmt(mh.sigma_mean) + " (3 SE = " + fmt(sigma_tol) + ")");
  return check.outcome();
}

Outcome criterion_gig_means() {
  Check check("gig");
  bqr::RngStream rng(8301);
  const int n = 100000;
  for (double delta2 : {0.01, 1.0, 100.0}) {
    for (double zeta2 : {0.01, 1.0, 100.0}) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += bqr::sample_gig_half(bqr::GigHalfParams(delta2, zeta2), rng);
      const double mean = s / n;
      const double expected = oracle::gig_half_mean(delta2, zeta2);
      check.require(std::abs(mean / expected - 1.0) < 0.02,
                    "(" + fmt(delta2) + "," + fmt(zeta2) + ") rel err " +
                        fmt(std::abs(mean / expected - 1.0)));
    }
  }
  return check.outcome();
}

Outcome criterion_ald_identities() {
  Check check("ald");
  // density integrates to one
  for (double sigma : {0.5, 2.0}) {
    for (double tau : {0.2, 0.5, 0.85}) {
      const double integral = oracle::ald_density_integral(0.3, sigma, tau);
      check.require(std::abs(integral - 1.0) < 1e-6,
                    "integral err " + fmt(std::abs(integral - 1.0)));
    }
  }
  // moments and quantile of direct draws; mixture construction agrees
  const double mu = 0.8, sigma = 1.4, tau = 0.3;
  const std::size_t n = 1000000;
  std::mt19937_64 eng(8401);
  std::vector<double> direct(n);
  for (auto& d : direct) d = oracle::ald_draw(eng, mu, sigma, tau);

  const double q_se = sigma / std::sqrt(static_cast<double>(n) * tau * (1.0 - tau));
  check.require(std::abs(bqr::quantile(direct, tau) - mu) < 5.0 * q_se,
                "tau-quantile " + fmt(bqr::quantile(direct, tau)) + " vs mu " + fmt(mu));
  const double var_expected = sigma * sigma * bqr::variance_factor(bqr::QuantileLevel{tau});
  check.require(std::abs(bqr::variance(direct) / var_expected - 1.0) < 0.02,
                "variance rel err " + fmt(std::abs(bqr::variance(direct) / var_expected - 1.0)));

  const auto mc = bqr::mixture_constants(bqr::QuantileLevel{tau});
  bqr::RngStream rng(8402);
  std::vector<double> mixture(n);
  for (auto& d : mixture) {
    const double v = rng.exponential(sigma);
    d = mu + mc.theta * v + std::sqrt(mc.psi2 * sigma * v) * rng.normal();
  }
  const double mean_se = std::sqrt(2.0 * var_expected / n);
  check.require(std::abs(bqr::mean(mixture) - bqr::mean(direct)) < 5.0 * mean_se, "mixture mean");
  check.require(std::abs(bqr::variance(mixture) / bqr::variance(direct) - 1.0) < 0.02,
                "mixture variance");
  check.require(std::abs(bqr::quantile(mixture, tau) - bqr::quantile(direct, tau)) < 7.0 * q_se,
                "mixture quantile");
  return check.outcome();
}

Outcome criterion_sim1_calibration() {
  Check check("sim1");
  const auto start = std::chrono::steady_clock::now();
  const bqr::CalibrationResult result =
      bqr::run_calibration_study({100}, {0.25, 0.5, 0.75}, 20, 8501);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const int reps = result.replications;
  int good = 0;
  double worst = 0.0;
  for (int r = 0; r < reps; ++r) {
    double max_over_taus = 0.0;
    for (const auto& cell : result.cells) {
      max_over_taus = std::max(max_over_taus, cell.max_prob[static_cast<std::size_t>(r)]);
    }
    worst = std::max(worst, max_over_taus);
    if (max_over_taus < 0.10) ++good;
  }
  check.require(good >= 19, std::to_string(good) + "/20 replications below 0.10 (worst " +
                                fmt(worst) + ")");
  check.require(seconds < 600.0, "runtime " + fmt(seconds) + "s < 600s");
  return check.outcome();
}

Outcome criterion_sim2_probabilities() {
  Check check("sim2");
  const auto start = std::chrono::steady_clock::now();

  bqr::StudyResult s4 = bqr::run_study(bqr::make_scenario(4, 20, 8601, {0.1}));
  check.require(s4.per_tau[0].prob_ast && s4.per_tau[0].prob_ast->mean > 0.95,
                "scenario 4 tau 0.1 ast mean " + fmt(s4.per_tau[0].prob_ast->mean) + " > 0.95");

  bqr::StudyResult s2 = bqr::run_study(bqr::make_scenario(2, 20, 8602, {0.9}));
  check.require(s2.per_tau[0].prob_star && s2.per_tau[0].prob_star->mean > 0.90,
                "scenario 2 tau 0.9 star mean " + fmt(s2.per_tau[0].prob_star->mean) + " > 0.90");

  bqr::StudyResult s3 = bqr::run_study(bqr::make_scenario(3, 20, 8603, {0.5}));
  const double m = s3.per_tau[0].prob_ast ? s3.per_tau[0].prob_ast->mean : -1.0;
  check.require(m >= 0.45 && m <= 0.85, "scenario 3 tau 0.5 ast mean " + fmt(m) + " in [0.45, 0.85]");

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check.require(seconds < 1200.0, "runtime " + fmt(seconds) + "s < 1200s");
  return check.outcome();
}

Outcome criterion_relative_kl() {
  Check check("relkl");
  bqr::StudyResult s4 = bqr::run_study(bqr::make_scenario(4, 20, 8701, {0.5}));
  check.require(s4.per_tau[0].relkl_ast && s4.per_tau[0].relkl_ast->mean > 9.0,
                "scenario 4 tau 0.5 ast relative KL mean " + fmt(s4.per_tau[0].relkl_ast->mean) +
                    " > 9");
  bqr::StudyResult s2 = bqr::run_study(bqr::make_scenario(2, 20, 8702, {0.1}));
  check.require(s2.per_tau[0].relkl_star && s2.per_tau[0].relkl_star->mean > 3.0,
                "scenario 2 tau 0.1 star relative KL mean " + fmt(s2.per_tau[0].relkl_star->mean) +
                    " > 3");
  return check.outcome();
}

Outcome criterion_kde_kl() {
  Check check("kde");
  bqr::RngStream rng(8801);
  const std::size_t m = 100000;
  std::vector<double> base(m);
  for (auto& v : base) v = 20.0 + rng.normal();

  const bqr::KdeSpec spec;
  check.require(bqr::kl_divergence_kde(base, base, spec) < 1e-10, "K(f, f) < 1e-10");

  const struct {
    double mean, sd;
  } others[] = {{20.5, 1.0}, {21.0, 1.0}, {21.4, 1.0}, {22.0, 1.0}, {20.0, 2.0}};
  for (const auto& o : others) {
    std::vector<double> sample(m);
    for (auto& v : sample) v = o.mean + o.sd * rng.normal();
    const double truth = oracle::gaussian_kl(20.0, 1.0, o.mean, o.sd);
    const double est = bqr::kl_divergence_kde(base, sample, spec);
    check.require(std::abs(est - truth) < 0.05,
                  "KL(" + fmt(truth) + ") err " + fmt(std::abs(est - truth)));
  }
  return check.outcome();
}

Outcome criterion_sigma_shape() {
  Check check("sigma");
  const bqr::Dataset data = line_data(1000, 1.0, 2.0, 8901);
  double sigma_mean[3] = {0, 0, 0};
  const double taus[3] = {0.1, 0.5, 0.9};
  for (int k = 0; k < 3; ++k) {
    const bqr::PosteriorChains chains = bqr::run_gibbs(data, default_config(taus[k], 2, 8902));
    sigma_mean[k] = chains.sigma.mean();
  }
  check.require(sigma_mean[1] > sigma_mean[0], "sigma(0.5)=" + fmt(sigma_mean[1]) +
                                                   " > sigma(0.1)=" + fmt(sigma_mean[0]));
  check.require(sigma_mean[1] > sigma_mean[2], "sigma(0.5) > sigma(0.9)=" + fmt(sigma_mean[2]));
  return check.outcome();
}

bool directories_identical(const fs::path& a, const fs::path& b, std::string& detail) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(a)) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(b)) ++count_b;
  if (count_b != names.size()) {
    detail = "file counts differ";
    return false;
  }
  for (const std::string& name : names) {
    std::ifstream fa(a / name, std::ios::binary), fb(b / name, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) {
      detail = name + " differs";
      return false;
    }
  }
  return true;
}

Outcome criterion_determinism() {
  Check check("determinism");
  const std::string cli = BQR_CLI_PATH;
  const std::string input = std::string(BQR_DATA_DIR) + "/synthetic_gini.csv";
  const fs::path root = fs::temp_directory_path() / "bqr_acceptance_det";
  fs::remove_all(root);
  fs::create_directories(root);

  const std::string common = " --iterations 600 --burnin 100 --seed 424242";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fit", " fit --input " + input + " --response gini --taus 0.25,0.5,0.75 --save-draws" + common},
      {"diagnose", " diagnose --input " + input + " --response gini --taus 0.5 --kl-mode single" + common},
      {"simulate", " simulate --scenario 2 --reps 2 --taus 0.5 --seed 7 --out "},
      {"calibrate", " calibrate --reps 2 --taus 0.5 --n 30 --seed 7 --out "},
  };
  for (const auto& [name, args] : commands) {
    const fs::path dir_a = root / (name + "_a");
    const fs::path dir_b = root / (name + "_b");
    std::string cmd_a, cmd_b;
    if (name == "fit" || name == "diagnose") {
      cmd_a = cli + args + " --out " + dir_a.string();
      cmd_b = cli + args + " --out " + dir_b.string();
    } else {
      cmd_a = cli + args + dir_a.string();
      cmd_b = cli + args + dir_b.string();
    }
    const int rc_a = std::system(cmd_a.c_str());
    const int rc_b = std::system(cmd_b.c_str());
    check.require(rc_a == 0 && rc_b == 0, name + " exit codes");
    std::string why;
    check.require(directories_identical(dir_a, dir_b, why), name + " byte-identical reruns" +
                                                                (why.empty() ? "" : " (" + why + ")"));
  }
  return check.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"sampler ground truth at tau 0.1/0.5/0.9", criterion_sampler_ground_truth},
      {"Gibbs matches the exact-posterior MH oracle", criterion_mh_oracle},
      {"GIG(1/2) means across nine parameter pairs", criterion_gig_means},
      {"asymmetric Laplace identities and mixture law", criterion_ald_identities},
      {"clean-data calibration stays under the 0.10 rule", criterion_sim1_calibration},
      {"contamination studies reproduce the probability table", criterion_sim2_probabilities},
      {"relative KL separates the injected outliers", criterion_relative_kl},
      {"KDE KL estimator matches Gaussian closed forms", criterion_kde_kl},
      {"posterior sigma is largest at the median quantile", criterion_sigma_shape},
      {"identical seeds give byte-identical outputs", criterion_determinism},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& err) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + err.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %zu: %s (%.1fs) %s\n", outcome.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), seconds, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
