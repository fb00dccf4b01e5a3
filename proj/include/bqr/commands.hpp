#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bqr/outlier.hpp"

namespace bqr {

// Everything a single CLI invocation needs; the binary only parses flags
// into this and dispatches. Library-level so the command paths are testable
// without spawning a process.
struct RunManifest {
  enum class Command { fit, diagnose, simulate, calibrate };

  Command command = Command::fit;
  std::string input_path;
  std::string response;
  std::vector<double> taus;  // empty = per-command default
  int iterations = 3000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
  double prior_beta_var = 100.0;
  double prior_sigma_shape = 1.5;
  double prior_sigma_rate = 0.05;
  ProbRule prob_rule = ProbRule::maxrule;
  bool kl_all = true;  // false = single fixed reference observation
  double flag_threshold = 0.10;
  std::string out_dir;
  bool no_intercept = false;
  int scenario = 1;
  int replications = 20;
  std::vector<int> n_values = {100, 300};
  bool save_draws = false;

  std::vector<double> effective_taus() const;
  void validate() const;
};

// Workers for the per-quantile fan-out: BQR_THREADS when set, otherwise one
// per requested quantile.
int fanout_workers(int n_taus);

// Each command writes its files under manifest.out_dir (created if missing)
// plus a manifest.json recording every setting; throws on any failure.
void cmd_fit(const RunManifest& manifest);
void cmd_diagnose(const RunManifest& manifest);
void cmd_simulate(const RunManifest& manifest);
void cmd_calibrate(const RunManifest& manifest);

void run_command(const RunManifest& manifest);

}  // namespace bqr
