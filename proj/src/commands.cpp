#include "bqr/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "bqr/csv.hpp"
#include "bqr/gibbs.hpp"
#include "bqr/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bqr {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string command_name(RunManifest::Command c) {
  switch (c) {
    case RunManifest::Command::fit: return "fit";
    case RunManifest::Command::diagnose: return "diagnose";
    case RunManifest::Command::simulate: return "simulate";
    case RunManifest::Command::calibrate: return "calibrate";
  }
  return "unknown";
}

FitConfig config_for(const RunManifest& m, double tau, Eigen::Index p, std::uint64_t seed) {
  FitConfig config;
  config.tau = QuantileLevel(tau);
  config.iterations = m.iterations;
  config.burn_in = m.burn_in;
  config.thin = m.thin;
  config.seed = seed;
  config.prior.beta_mean = Eigen::VectorXd::Zero(p);
  config.prior.beta_cov = m.prior_beta_var * Eigen::MatrixXd::Identity(p, p);
  config.prior.sigma_shape = m.prior_sigma_shape;
  config.prior.sigma_rate = m.prior_sigma_rate;
  return config;
}

void ensure_out_dir(const std::string& dir) {
  fs::create_directories(dir);
  const fs::path probe = fs::path(dir) / ".bqr_write_probe";
  std::ofstream test(probe);
  if (!test) throw std::runtime_error("output directory '" + dir + "' is not writable");
  test.close();
  fs::remove(probe);
}

json settings_json(const RunManifest& m) {
  json j;
  j["command"] = command_name(m.command);
  j["taus"] = m.effective_taus();
  j["seed"] = m.seed;
  j["iterations"] = m.iterations;
  j["burnin"] = m.burn_in;
  j["thin"] = m.thin;
  j["prior"] = {{"beta_var", m.prior_beta_var},
                {"sigma_shape", m.prior_sigma_shape},
                {"sigma_rate", m.prior_sigma_rate}};
  if (m.command == RunManifest::Command::fit || m.command == RunManifest::Command::diagnose) {
    j["input"] = m.input_path;
    j["response"] = m.response;
    j["no_intercept"] = m.no_intercept;
  }
  if (m.command == RunManifest::Command::fit) {
    j["save_draws"] = m.save_draws;
  }
  if (m.command == RunManifest::Command::diagnose) {
    j["prob_rule"] = m.prob_rule == ProbRule::maxrule ? "maxrule" : "pairwise";
    j["kl_mode"] = m.kl_all ? "all" : "single";
    j["flag_threshold"] = m.flag_threshold;
  }
  if (m.command == RunManifest::Command::simulate) {
    j["scenario"] = m.scenario;
    j["replications"] = m.replications;
    j["prob_rule"] = "maxrule";
    j["kl_mode"] = "single_reference_per_replication";
  }
  if (m.command == RunManifest::Command::calibrate) {
    j["n_values"] = m.n_values;
    j["replications"] = m.replications;
    j["prob_rule"] = "maxrule";
  }
  return j;
}

void write_manifest(const RunManifest& m, std::vector<std::string> outputs) {
  std::sort(outputs.begin(), outputs.end());
  json j = settings_json(m);
  j["outputs"] = outputs;
  const fs::path path = fs::path(m.out_dir) / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::uint64_t tau_seed(const RunManifest& m, std::size_t k) {
  return RngStream(m.seed).derive(k);
}

// The single-reference mode needs a deterministic anchor on real data: the
// observation the max-rule estimator considers most typical.
Eigen::Index pick_reference(const Eigen::VectorXd& prob) {
  Eigen::Index best = 0;
  prob.minCoeff(&best);
  return best;
}

struct FitOutput {
  double tau;
  ChainSummary summary;
  PosteriorChains chains;
};

std::vector<FitOutput> fit_all_taus(const RunManifest& m, const Dataset& data) {
  const std::vector<double> taus = m.effective_taus();
  const int n_taus = static_cast<int>(taus.size());
  std::vector<FitOutput> outputs(static_cast<std::size_t>(n_taus));
  std::vector<std::string> errors(static_cast<std::size_t>(n_taus));

#pragma omp parallel for schedule(dynamic) num_threads(fanout_workers(n_taus))
  for (int k = 0; k < n_taus; ++k) {
    try {
      const FitConfig config = config_for(m, taus[static_cast<std::size_t>(k)], data.p(),
                                          tau_seed(m, static_cast<std::size_t>(k)));
      PosteriorChains chains = run_gibbs(data, config);
      ChainSummary summary = summarize_chains(chains, 0.95);
      outputs[static_cast<std::size_t>(k)] =
          FitOutput{taus[static_cast<std::size_t>(k)], std::move(summary), std::move(chains)};
    } catch (const std::exception& err) {
      errors[static_cast<std::size_t>(k)] = err.what();
    }
  }
  for (const std::string& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return outputs;
}

std::string summary_row_prefix(double tau) { return format_double(tau); }

}  // namespace

std::vector<double> RunManifest::effective_taus() const {
  if (!taus.empty()) return taus;
  switch (command) {
    case Command::simulate: return {0.1, 0.5, 0.9};
    case Command::calibrate: return {0.25, 0.5, 0.75};
    default: return {0.5};
  }
}

void RunManifest::validate() const {
  if (out_dir.empty()) throw std::invalid_argument("--out directory is required");
  const std::vector<double> ts = effective_taus();
  for (double t : ts) QuantileLevel{t};
  std::vector<double> sorted(ts);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("--taus values must be distinct");
  }
  if (command == Command::fit || command == Command::diagnose) {
    if (input_path.empty()) throw std::invalid_argument("--input is required");
    if (response.empty()) throw std::invalid_argument("--response is required");
  }
  if (command == Command::simulate && (scenario < 1 || scenario > 4)) {
    throw std::invalid_argument("--scenario must be 1..4");
  }
  if (replications < 1) throw std::invalid_argument("--reps must be >= 1");
  if (!(flag_threshold > 0.0)) throw std::invalid_argument("--flag-threshold must be positive");
  if (!(prior_beta_var > 0.0 && prior_sigma_shape > 0.0 && prior_sigma_rate > 0.0)) {
    throw std::invalid_argument("prior hyperparameters must be positive");
  }
}

int fanout_workers(int n_taus) {
  if (const char* env = std::getenv("BQR_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, n_taus);
  }
  return n_taus;
}

void cmd_fit(const RunManifest& manifest) {
  manifest.validate();
  ensure_out_dir(manifest.out_dir);
  const Dataset data = load_csv(manifest.input_path, manifest.response, !manifest.no_intercept);
  const std::vector<FitOutput> fits = fit_all_taus(manifest, data);

  std::vector<std::string> outputs;
  std::vector<std::vector<std::string>> beta_rows;
  std::vector<std::vector<std::string>> sigma_rows;
  for (const FitOutput& fit : fits) {
    const std::string tau_text = summary_row_prefix(fit.tau);
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      const ParamSummary& s = fit.summary.beta[static_cast<std::size_t>(j)];
      beta_rows.push_back({tau_text, data.column_names[static_cast<std::size_t>(j)],
                           format_double(s.mean), format_double(s.median), format_double(s.lower),
                           format_double(s.upper)});
    }
    const ParamSummary& s = fit.summary.sigma;
    sigma_rows.push_back({tau_text, format_double(s.mean), format_double(s.median),
                          format_double(s.lower), format_double(s.upper)});
  }

  const std::string beta_path = (std::filesystem::path(manifest.out_dir) / "beta_summary.csv").string();
  write_csv(beta_path, {"tau", "coefficient", "mean", "median", "q2.5", "q97.5"}, beta_rows);
  outputs.push_back("beta_summary.csv");

  const std::string sigma_path =
      (std::filesystem::path(manifest.out_dir) / "sigma_summary.csv").string();
  write_csv(sigma_path, {"tau", "mean", "median", "q2.5", "q97.5"}, sigma_rows);
  outputs.push_back("sigma_summary.csv");

  if (manifest.save_draws) {
    for (const FitOutput& fit : fits) {
      const std::string name = "draws_tau=" + format_double(fit.tau) + ".csv";
      std::vector<std::string> header = data.column_names;
      header.push_back("sigma");
      std::vector<std::vector<std::string>> rows;
      for (Eigen::Index l = 0; l < fit.chains.retained(); ++l) {
        std::vector<std::string> row;
        for (Eigen::Index j = 0; j < data.p(); ++j) row.push_back(format_double(fit.chains.beta(l, j)));
        row.push_back(format_double(fit.chains.sigma[l]));
        rows.push_back(std::move(row));
      }
      write_csv((std::filesystem::path(manifest.out_dir) / name).string(), header, rows);
      outputs.push_back(name);
    }
  }
  write_manifest(manifest, std::move(outputs));
}

void cmd_diagnose(const RunManifest& manifest) {
  manifest.validate();
  ensure_out_dir(manifest.out_dir);
  const Dataset data = load_csv(manifest.input_path, manifest.response, !manifest.no_intercept);
  const std::vector<FitOutput> fits = fit_all_taus(manifest, data);

  std::vector<std::string> outputs;
  for (const FitOutput& fit : fits) {
    const KdeSpec kde;
    KlMode mode = KlMode::all_others();
    if (!manifest.kl_all) {
      mode = KlMode::single_reference(
          pick_reference(exceedance_probabilities(fit.chains, ProbRule::maxrule)));
    }
    const OutlierReport report =
        build_report(fit.chains, manifest.prob_rule, mode, kde, manifest.flag_threshold);

    const std::string name = "outliers_tau=" + format_double(fit.tau) + ".csv";
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      rows.push_back({std::to_string(i), format_double(report.prob[i]),
                      format_double(report.kl[i]),
                      report.flagged[static_cast<std::size_t>(i)] ? "1" : "0"});
    }
    write_csv((std::filesystem::path(manifest.out_dir) / name).string(),
              {"row_index", "probability", "mean_kl", "flagged"}, rows);
    outputs.push_back(name);
  }
  write_manifest(manifest, std::move(outputs));
}

void cmd_simulate(const RunManifest& manifest) {
  manifest.validate();
  ensure_out_dir(manifest.out_dir);
  const ScenarioSpec spec = make_scenario(manifest.scenario, manifest.replications, manifest.seed,
                                          manifest.effective_taus());
  const StudyResult result = run_study(spec);

  const std::string scenario_text = std::to_string(spec.scenario);
  std::vector<std::vector<std::string>> prob_rows, relkl_rows, target_rows, raw_rows, beta_rows;
  for (const auto& per : result.per_tau) {
    const std::string tau_text = format_double(per.tau);
    const auto add_summary = [&](std::vector<std::vector<std::string>>& rows, const char* target,
                                 const std::optional<QuantSummary>& s) {
      if (!s) return;
      rows.push_back({scenario_text, tau_text, target, format_double(s->mean),
                      format_double(s->median), format_double(s->q025), format_double(s->q975)});
    };
    add_summary(prob_rows, "ast", per.prob_ast);
    add_summary(prob_rows, "star", per.prob_star);
    add_summary(relkl_rows, "ast", per.relkl_ast);
    add_summary(relkl_rows, "star", per.relkl_star);
  }
  for (const TargetRecord& rec : result.records) {
    target_rows.push_back({std::to_string(rec.replication), format_double(rec.tau),
                           rec.target == '*' ? "ast" : "star", format_double(rec.prob),
                           format_double(rec.relative_kl)});
  }
  for (std::size_t k = 0; k < result.per_tau.size(); ++k) {
    const auto& per = result.per_tau[k];
    for (std::size_t r = 0; r < per.mean_prob.size(); ++r) {
      raw_rows.push_back({std::to_string(r), format_double(per.tau),
                          format_double(per.mean_prob[r]), format_double(per.max_prob[r])});
      std::vector<std::string> brow{std::to_string(r), format_double(per.tau)};
      for (Eigen::Index j = 0; j < per.beta_hat.cols(); ++j) {
        brow.push_back(format_double(per.beta_hat(static_cast<Eigen::Index>(r), j)));
      }
      beta_rows.push_back(std::move(brow));
    }
  }

  namespace fs = std::filesystem;
  std::vector<std::string> outputs;
  write_csv((fs::path(manifest.out_dir) / "sim_prob_summary.csv").string(),
            {"scenario", "tau", "target", "mean", "median", "q2.5", "q97.5"}, prob_rows);
  outputs.push_back("sim_prob_summary.csv");
  write_csv((fs::path(manifest.out_dir) / "sim_relkl_summary.csv").string(),
            {"scenario", "tau", "target", "mean", "median", "q2.5", "q97.5"}, relkl_rows);
  outputs.push_back("sim_relkl_summary.csv");
  write_csv((fs::path(manifest.out_dir) / "sim_targets.csv").string(),
            {"replication", "tau", "target", "probability", "relative_kl"}, target_rows);
  outputs.push_back("sim_targets.csv");
  write_csv((fs::path(manifest.out_dir) / "sim_raw.csv").string(),
            {"replication", "tau", "mean_prob", "max_prob"}, raw_rows);
  outputs.push_back("sim_raw.csv");
  std::vector<std::string> beta_header{"replication", "tau", "beta0", "beta1", "beta2", "beta3"};
  write_csv((fs::path(manifest.out_dir) / "sim_beta.csv").string(), beta_header, beta_rows);
  outputs.push_back("sim_beta.csv");
  write_manifest(manifest, std::move(outputs));
}

void cmd_calibrate(const RunManifest& manifest) {
  manifest.validate();
  ensure_out_dir(manifest.out_dir);
  const CalibrationResult result = run_calibration_study(
      manifest.n_values, manifest.effective_taus(), manifest.replications, manifest.seed);

  std::vector<std::vector<std::string>> raw_rows, summary_rows;
  for (const auto& cell : result.cells) {
    const std::string n_text = std::to_string(cell.n);
    const std::string tau_text = format_double(cell.tau);
    for (std::size_t r = 0; r < cell.mean_prob.size(); ++r) {
      raw_rows.push_back({n_text, tau_text, std::to_string(r), format_double(cell.mean_prob[r]),
                          format_double(cell.max_prob[r])});
    }
    summary_rows.push_back({n_text, tau_text, format_double(cell.mean_prob_summary.mean),
                            format_double(cell.mean_prob_summary.median),
                            format_double(cell.mean_prob_summary.q025),
                            format_double(cell.mean_prob_summary.q975)});
  }

  namespace fs = std::filesystem;
  std::vector<std::string> outputs;
  write_csv((fs::path(manifest.out_dir) / "calibration_raw.csv").string(),
            {"n", "tau", "replication", "mean_prob", "max_prob"}, raw_rows);
  outputs.push_back("calibration_raw.csv");
  write_csv((fs::path(manifest.out_dir) / "calibration_summary.csv").string(),
            {"n", "tau", "mean", "median", "q2.5", "q97.5"}, summary_rows);
  outputs.push_back("calibration_summary.csv");
  write_manifest(manifest, std::move(outputs));
}

void run_command(const RunManifest& manifest) {
  switch (manifest.command) {
    case RunManifest::Command::fit: cmd_fit(manifest); return;
    case RunManifest::Command::diagnose: cmd_diagnose(manifest); return;
    case RunManifest::Command::simulate: cmd_simulate(manifest); return;
    case RunManifest::Command::calibrate: cmd_calibrate(manifest); return;
  }
  throw std::invalid_argument("unknown command");
}

}  // namespace bqr
