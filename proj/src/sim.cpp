#include "bqr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bqr/gibbs.hpp"
#include "bqr/stats.hpp"

namespace bqr {

namespace {

// Fixed substream ids so every replication is reproducible in isolation.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kFitStream = 2;
constexpr std::uint64_t kReferenceStream = 3;

FitConfig fit_config_for(double tau, Eigen::Index p, std::uint64_t seed) {
  FitConfig config;
  config.tau = QuantileLevel(tau);
  config.seed = seed;
  config.prior = PriorSpec::defaults(p);
  return config;
}

void check_taus(const std::vector<double>& taus) {
  if (taus.empty()) throw std::invalid_argument("simulation: need at least one quantile");
  for (double t : taus) QuantileLevel{t};
}

struct RepOutcome {
  bool failed = false;
  std::string message;
  // indexed by tau
  std::vector<double> mean_prob, max_prob;
  std::vector<Eigen::VectorXd> beta_hat;
  std::vector<double> prob_ast, prob_star, relkl_ast, relkl_star;  // NaN when absent
};

}  // namespace

void ScenarioSpec::validate() const {
  if (scenario < 1 || scenario > 4) throw std::invalid_argument("ScenarioSpec: scenario must be 1..4");
  const bool want_ast = scenario == 3 || scenario == 4;
  const bool want_star = scenario == 2 || scenario == 3;
  if (include_ast != want_ast || include_star != want_star) {
    throw std::invalid_argument("ScenarioSpec: outlier flags do not match the scenario number");
  }
  if (n < 10) throw std::invalid_argument("ScenarioSpec: n too small");
  if (betas.size() != 4) throw std::invalid_argument("ScenarioSpec: four coefficients required");
  if (!(noise_sd > 0.0)) throw std::invalid_argument("ScenarioSpec: noise_sd must be positive");
  if (replications < 1) throw std::invalid_argument("ScenarioSpec: replications must be >= 1");
  check_taus(taus);
}

ScenarioSpec make_scenario(int scenario, int replications, std::uint64_t master_seed,
                           std::vector<double> taus) {
  ScenarioSpec spec;
  spec.scenario = scenario;
  spec.include_ast = scenario == 3 || scenario == 4;
  spec.include_star = scenario == 2 || scenario == 3;
  spec.replications = replications;
  spec.master_seed = master_seed;
  spec.taus = std::move(taus);
  spec.betas = Eigen::Vector4d(0.0, 1.0, -1.0, 2.0);
  spec.n = 100;
  spec.noise_sd = 2.0;
  return spec;
}

Dataset generate_base_data(const ScenarioSpec& spec, RngStream& rng) {
  const Eigen::Index n = spec.n;
  const Eigen::Index p = spec.betas.size();
  Eigen::MatrixXd X(n, p);
  X.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 1; j < p; ++j) X(i, j) = 10.0 * rng.uniform01();
  }
  Eigen::VectorXd y = X * spec.betas;
  for (Eigen::Index i = 0; i < n; ++i) y[i] += spec.noise_sd * rng.normal();
  std::vector<std::string> names{"intercept"};
  for (Eigen::Index j = 1; j < p; ++j) names.push_back("x" + std::to_string(j));
  return make_dataset(std::move(y), std::move(X), std::move(names));
}

InjectedData inject_outliers(const Dataset& base, const ScenarioSpec& spec) {
  if (!spec.include_ast && !spec.include_star) return {base, std::nullopt, std::nullopt};
  if (base.p() != 4) throw std::invalid_argument("inject_outliers: expects the four-column design");

  const Eigen::Index n = base.n();
  const double x1_bar = base.X.col(1).mean();
  const double x2_bar = base.X.col(2).mean();
  const double x3_bar = base.X.col(3).mean();

  const Eigen::Index extra = (spec.include_ast ? 1 : 0) + (spec.include_star ? 1 : 0);
  Eigen::MatrixXd X(n + extra, 4);
  Eigen::VectorXd y(n + extra);
  X.topRows(n) = base.X;
  y.head(n) = base.y;

  InjectedData out{Dataset{}, std::nullopt, std::nullopt};
  Eigen::Index row = n;
  if (spec.include_ast) {
    X.row(row) << 1.0, x1_bar, 20.0, x3_bar;
    y[row] = 30.0;
    out.ast_index = row;
    ++row;
  }
  if (spec.include_star) {
    X.row(row) << 1.0, 20.0, x2_bar, x3_bar;
    y[row] = 0.0;
    out.star_index = row;
    ++row;
  }
  out.data = make_dataset(std::move(y), std::move(X), base.column_names);
  return out;
}

QuantSummary summarize_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summarize_values: empty input");
  const double m = mean(values);
  std::sort(values.begin(), values.end());
  return {m, quantile_sorted(values, 0.5), quantile_sorted(values, 0.025),
          quantile_sorted(values, 0.975)};
}

StudyResult run_study(const ScenarioSpec& spec) {
  spec.validate();
  const int reps = spec.replications;
  const std::size_t n_taus = spec.taus.size();
  const RngStream master(spec.master_seed);

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < reps; ++r) {
    RepOutcome& out = outcomes[static_cast<std::size_t>(r)];
    try {
      const std::uint64_t rep_seed = master.derive(static_cast<std::uint64_t>(r));
      RngStream data_rng(rep_seed, kDataStream);
      const Dataset base = generate_base_data(spec, data_rng);
      const InjectedData injected = inject_outliers(base, spec);
      const Eigen::Index n_clean = base.n();

      RngStream ref_rng(rep_seed, kReferenceStream);
      const Eigen::Index reference =
          std::min<Eigen::Index>(static_cast<Eigen::Index>(ref_rng.uniform01() * n_clean), n_clean - 1);

      const RngStream fit_seeds(rep_seed, kFitStream);
      const bool has_targets = injected.ast_index || injected.star_index;
      const KdeSpec kde;

      for (std::size_t k = 0; k < n_taus; ++k) {
        const FitConfig config =
            fit_config_for(spec.taus[k], injected.data.p(), fit_seeds.derive(k));
        const PosteriorChains chains = run_gibbs(injected.data, config);

        Eigen::VectorXd prob;
        double relkl_ast = std::numeric_limits<double>::quiet_NaN();
        double relkl_star = std::numeric_limits<double>::quiet_NaN();
        if (has_targets) {
          const OutlierReport report = build_report(
              chains, ProbRule::maxrule, KlMode::single_reference(reference), kde);
          prob = report.prob;
          double denom = 0.0;
          int denom_count = 0;
          for (Eigen::Index i = 0; i < n_clean; ++i) {
            if (i == reference) continue;
            denom += report.kl[i];
            ++denom_count;
          }
          denom /= static_cast<double>(denom_count);
          if (!(denom > 0.0)) throw std::runtime_error("run_study: degenerate KL baseline");
          if (injected.ast_index) relkl_ast = report.kl[*injected.ast_index] / denom;
          if (injected.star_index) relkl_star = report.kl[*injected.star_index] / denom;
        } else {
          prob = exceedance_probabilities(chains, ProbRule::maxrule);
        }

        out.mean_prob.push_back(prob.mean());
        out.max_prob.push_back(prob.maxCoeff());
        out.beta_hat.push_back(chains.beta.colwise().mean());
        out.prob_ast.push_back(injected.ast_index ? prob[*injected.ast_index]
                                                  : std::numeric_limits<double>::quiet_NaN());
        out.prob_star.push_back(injected.star_index ? prob[*injected.star_index]
                                                    : std::numeric_limits<double>::quiet_NaN());
        out.relkl_ast.push_back(relkl_ast);
        out.relkl_star.push_back(relkl_star);
      }
    } catch (const std::exception& err) {
      out.failed = true;
      out.message = "replication " + std::to_string(r) + ": " + err.what();
    }
  }

  StudyResult result;
  result.spec = spec;
  for (const RepOutcome& out : outcomes) {
    if (out.failed) result.failures.push_back(out.message);
  }
  const int failed = static_cast<int>(result.failures.size());
  if (failed * 20 > reps) {  // more than 5%
    std::string detail = result.failures.empty() ? "" : (": " + result.failures.front());
    throw std::runtime_error("run_study: " + std::to_string(failed) + " of " +
                             std::to_string(reps) + " replications failed" + detail);
  }
  result.replications_completed = reps - failed;

  const Eigen::Index p = spec.betas.size();
  for (std::size_t k = 0; k < n_taus; ++k) {
    StudyResult::PerTau per;
    per.tau = spec.taus[k];
    per.beta_hat.resize(result.replications_completed, p);
    std::vector<double> pa, ps, ka, ks;
    Eigen::Index row = 0;
    for (int r = 0; r < reps; ++r) {
      const RepOutcome& out = outcomes[static_cast<std::size_t>(r)];
      if (out.failed) continue;
      per.mean_prob.push_back(out.mean_prob[k]);
      per.max_prob.push_back(out.max_prob[k]);
      per.beta_hat.row(row++) = out.beta_hat[k];
      if (!std::isnan(out.prob_ast[k])) {
        pa.push_back(out.prob_ast[k]);
        ka.push_back(out.relkl_ast[k]);
        result.records.push_back({r, per.tau, '*', out.prob_ast[k], out.relkl_ast[k]});
      }
      if (!std::isnan(out.prob_star[k])) {
        ps.push_back(out.prob_star[k]);
        ks.push_back(out.relkl_star[k]);
        result.records.push_back({r, per.tau, '+', out.prob_star[k], out.relkl_star[k]});
      }
    }
    if (!pa.empty()) per.prob_ast = summarize_values(pa);
    if (!ps.empty()) per.prob_star = summarize_values(ps);
    if (!ka.empty()) per.relkl_ast = summarize_values(ka);
    if (!ks.empty()) per.relkl_star = summarize_values(ks);
    result.per_tau.push_back(std::move(per));
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const TargetRecord& a, const TargetRecord& b) {
              if (a.replication != b.replication) return a.replication < b.replication;
              if (a.tau != b.tau) return a.tau < b.tau;
              return a.target < b.target;
            });
  return result;
}

CalibrationResult run_calibration_study(const std::vector<int>& n_values,
                                        const std::vector<double>& taus, int replications,
                                        std::uint64_t master_seed) {
  if (n_values.empty()) throw std::invalid_argument("run_calibration_study: need sample sizes");
  check_taus(taus);
  if (replications < 1) throw std::invalid_argument("run_calibration_study: replications must be >= 1");

  CalibrationResult result;
  result.replications = replications;
  const RngStream master(master_seed);

  for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
    ScenarioSpec spec = make_scenario(1, replications, master_seed, taus);
    spec.n = n_values[ni];
    spec.validate();

    struct CalOutcome {
      bool failed = false;
      std::string message;
      std::vector<double> mean_prob, max_prob;  // per tau
    };
    std::vector<CalOutcome> outcomes(static_cast<std::size_t>(replications));

#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < replications; ++r) {
      CalOutcome& out = outcomes[static_cast<std::size_t>(r)];
      try {
        const std::uint64_t rep_seed =
            master.derive((static_cast<std::uint64_t>(ni) << 32) | static_cast<std::uint64_t>(r));
        RngStream data_rng(rep_seed, kDataStream);
        const Dataset data = generate_base_data(spec, data_rng);
        const RngStream fit_seeds(rep_seed, kFitStream);
        for (std::size_t k = 0; k < taus.size(); ++k) {
          const FitConfig config = fit_config_for(taus[k], data.p(), fit_seeds.derive(k));
          const PosteriorChains chains = run_gibbs(data, config);
          const Eigen::VectorXd prob = exceedance_probabilities(chains, ProbRule::maxrule);
          out.mean_prob.push_back(prob.mean());
          out.max_prob.push_back(prob.maxCoeff());
        }
      } catch (const std::exception& err) {
        out.failed = true;
        out.message = "n=" + std::to_string(spec.n) + " replication " + std::to_string(r) + ": " +
                      err.what();
      }
    }

    int failed = 0;
    for (const CalOutcome& out : outcomes) {
      if (out.failed) {
        result.failures.push_back(out.message);
        ++failed;
      }
    }
    if (failed * 20 > replications) {
      throw std::runtime_error("run_calibration_study: too many failed replications");
    }

    for (std::size_t k = 0; k < taus.size(); ++k) {
      CalibrationResult::Cell cell;
      cell.n = n_values[ni];
      cell.tau = taus[k];
      for (const CalOutcome& out : outcomes) {
        if (out.failed) continue;
        cell.mean_prob.push_back(out.mean_prob[k]);
        cell.max_prob.push_back(out.max_prob[k]);
      }
      cell.mean_prob_summary = summarize_values(cell.mean_prob);
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

}  // namespace bqr
