#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bqr/model.hpp"
#include "bqr/outlier.hpp"
#include "bqr/rng.hpp"

namespace bqr {

// One synthetic study: y = b0 + b1 x1 + b2 x2 + b3 x3 + noise with the
// covariates uniform on (0, 10), optionally contaminated with one or both
// of the fixed extreme observations
//   ast  (*) : y = 30, x1 = mean(x1), x2 = 20,       x3 = mean(x3)
//   star (+) : y = 0,  x1 = 20,       x2 = mean(x2), x3 = mean(x3)
// where the means are taken over the clean rows. Scenario numbering:
// 1 = clean, 2 = star only, 3 = both, 4 = ast only.
struct ScenarioSpec {
  int scenario = 1;
  int n = 100;
  Eigen::VectorXd betas;  // defaults to (0, 1, -1, 2)
  double noise_sd = 2.0;
  bool include_ast = false;
  bool include_star = false;
  std::vector<double> taus;
  int replications = 20;
  std::uint64_t master_seed = 0;

  void validate() const;
};

ScenarioSpec make_scenario(int scenario, int replications, std::uint64_t master_seed,
                           std::vector<double> taus = {0.1, 0.5, 0.9});

Dataset generate_base_data(const ScenarioSpec& spec, RngStream& rng);

struct InjectedData {
  Dataset data;
  std::optional<Eigen::Index> ast_index;
  std::optional<Eigen::Index> star_index;
};

InjectedData inject_outliers(const Dataset& base, const ScenarioSpec& spec);

struct QuantSummary {
  double mean;
  double median;
  double q025;
  double q975;
};

QuantSummary summarize_values(std::vector<double> values);

// Raw per-replication record for one injected observation.
struct TargetRecord {
  int replication;
  double tau;
  char target;  // '*' = ast, '+' = star
  double prob;
  double relative_kl;
};

struct StudyResult {
  struct PerTau {
    double tau;
    std::optional<QuantSummary> prob_ast, prob_star;
    std::optional<QuantSummary> relkl_ast, relkl_star;
    std::vector<double> mean_prob;  // per completed replication, all observations
    std::vector<double> max_prob;
    Eigen::MatrixXd beta_hat;       // completed replications x p posterior means
  };
  ScenarioSpec spec;
  std::vector<PerTau> per_tau;
  std::vector<TargetRecord> records;  // ordered by (replication, tau)
  std::vector<std::string> failures;
  int replications_completed = 0;
};

// Replicated fits across the scenario's quantiles. Probabilities use the
// max-rule estimator; each injected observation's Kullback-Leibler score is
// reported relative to the mean score of the clean observations, all scores
// measured against one clean reference row drawn once per replication.
// Replications run concurrently; aggregation order is fixed by replication
// index, so results are independent of scheduling. Individual replication
// failures are recorded and skipped; more than 5% failures aborts.
StudyResult run_study(const ScenarioSpec& spec);

struct CalibrationResult {
  struct Cell {
    int n;
    double tau;
    std::vector<double> mean_prob;  // per completed replication
    std::vector<double> max_prob;
    QuantSummary mean_prob_summary;
  };
  std::vector<Cell> cells;  // ordered by (n, tau)
  std::vector<std::string> failures;
  int replications = 0;
};

// Clean-data study of the probability distribution (no Kullback-Leibler
// summaries): per replication and quantile it records the mean and max
// max-rule probability over all observations.
CalibrationResult run_calibration_study(const std::vector<int>& n_values,
                                        const std::vector<double>& taus, int replications,
                                        std::uint64_t master_seed);

}  // namespace bqr
