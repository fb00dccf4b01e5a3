#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bqr/commands.hpp"

namespace {

void add_common_flags(CLI::App* cmd, bqr::RunManifest& m) {
  cmd->add_option("--taus", m.taus, "quantile levels, comma separated")->delimiter(',');
  cmd->add_option("--seed", m.seed, "master seed");
  cmd->add_option("--out", m.out_dir, "output directory")->required();
}

void add_chain_flags(CLI::App* cmd, bqr::RunManifest& m) {
  cmd->add_option("--iterations", m.iterations, "total Gibbs sweeps");
  cmd->add_option("--burnin", m.burn_in, "discarded initial sweeps");
  cmd->add_option("--thin", m.thin, "keep every thin-th sweep");
  cmd->add_option("--prior-beta-var", m.prior_beta_var, "prior variance of each coefficient");
  cmd->add_option("--prior-sigma-shape", m.prior_sigma_shape, "inverse-gamma prior shape");
  cmd->add_option("--prior-sigma-rate", m.prior_sigma_rate, "inverse-gamma prior rate");
}

void add_input_flags(CLI::App* cmd, bqr::RunManifest& m) {
  cmd->add_option("--input", m.input_path, "input CSV with a header row")->required();
  cmd->add_option("--response", m.response, "name of the response column")->required();
  cmd->add_flag("--no-intercept", m.no_intercept, "do not prepend an intercept column");
}

void add_rule_flags(CLI::App* cmd, bqr::RunManifest& m, std::string& prob_rule,
                    std::string& kl_mode) {
  cmd->add_option("--prob-rule", prob_rule, "pairwise|maxrule (default maxrule)")
      ->check(CLI::IsMember({"pairwise", "maxrule"}));
  cmd->add_option("--kl-mode", kl_mode, "all|single (default all)")
      ->check(CLI::IsMember({"all", "single"}));
  cmd->add_option("--flag-threshold", m.flag_threshold, "outlier probability flag threshold");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian quantile regression with latent-variable outlier diagnostics"};
  app.require_subcommand(1);

  bqr::RunManifest manifest;
  std::string prob_rule = "maxrule";
  std::string kl_mode = "all";

  CLI::App* fit = app.add_subcommand("fit", "fit one chain per quantile and write summaries");
  add_input_flags(fit, manifest);
  add_common_flags(fit, manifest);
  add_chain_flags(fit, manifest);
  fit->add_flag("--save-draws", manifest.save_draws, "also write the retained draws per quantile");

  CLI::App* diagnose =
      app.add_subcommand("diagnose", "fit and write per-observation outlier measures");
  add_input_flags(diagnose, manifest);
  add_common_flags(diagnose, manifest);
  add_chain_flags(diagnose, manifest);
  add_rule_flags(diagnose, manifest, prob_rule, kl_mode);

  CLI::App* simulate = app.add_subcommand("simulate", "run one contamination scenario study");
  add_common_flags(simulate, manifest);
  simulate->add_option("--scenario", manifest.scenario, "scenario 1..4")->required();
  simulate->add_option("--reps", manifest.replications, "replications (default 20)");

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "clean-data probability calibration study");
  add_common_flags(calibrate, manifest);
  calibrate->add_option("--reps", manifest.replications, "replications (default 20)");
  calibrate->add_option("--n", manifest.n_values, "sample sizes, comma separated")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) manifest.command = bqr::RunManifest::Command::fit;
  if (diagnose->parsed()) manifest.command = bqr::RunManifest::Command::diagnose;
  if (simulate->parsed()) manifest.command = bqr::RunManifest::Command::simulate;
  if (calibrate->parsed()) manifest.command = bqr::RunManifest::Command::calibrate;
  manifest.prob_rule = prob_rule == "pairwise" ? bqr::ProbRule::pairwise : bqr::ProbRule::maxrule;
  manifest.kl_all = kl_mode == "all";

  try {
    bqr::run_command(manifest);
  } catch (const std::exception& err) {
    nlohmann::json record{{"error", err.what()}, {"command", argv[argc > 1 ? 1 : 0]}};
    std::fprintf(stderr, "%s\n", record.dump().c_str());
    return 1;
  }
  return 0;
}
