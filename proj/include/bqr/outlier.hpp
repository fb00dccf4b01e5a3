#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bqr/model.hpp"

namespace bqr {

// Two estimators of P(O_i = 1) = 1/(n-1) sum_{j != i} P(v_i > v_j | data):
//   pairwise  — aligned-draw estimate of each P(v_i > v_j): the fraction of
//               sweeps l with v_i^(l) > v_j^(l). For exchangeable
//               observations every pairwise term sits near 1/2, so this
//               reads as a relative ranking rather than a rarity score.
//   maxrule   — replaces each pairwise term with the fraction of v_i draws
//               exceeding the maximum of the whole retained v_j chain. Much
//               more conservative (never above the pairwise term); typical
//               observations score near zero, which makes the 0.10
//               flagging rule meaningful. Default everywhere user-facing.
enum class ProbRule { pairwise, maxrule };

// How the per-observation Kullback-Leibler score KL(f_i) is assembled:
// averaged over all other latent posteriors, or measured against one fixed
// reference observation (cheaper by a factor of n).
struct KlMode {
  enum class Kind { all_others, single_reference };
  Kind kind = Kind::all_others;
  Eigen::Index reference = -1;

  static KlMode all_others() { return {Kind::all_others, -1}; }
  static KlMode single_reference(Eigen::Index j) { return {Kind::single_reference, j}; }
};

// Normal-kernel density estimation settings for the KL integrals.
// bandwidth <= 0 selects Silverman's rule per chain; a positive value is
// used as-is for both chains.
struct KdeSpec {
  double bandwidth = 0.0;
  int grid_points = 512;
  double density_floor = 1e-12;

  void validate() const;
};

struct OutlierReport {
  QuantileLevel tau{0.5};
  Eigen::VectorXd prob;             // P(O_i = 1), in [0, 1]
  Eigen::VectorXd kl;               // KL(f_i), >= 0
  std::optional<Eigen::Index> kl_reference;
  std::vector<char> flagged;        // prob > flag_threshold
  double flag_threshold = 0.10;
};

// Aligned-draw estimator for one observation. n >= 2 required.
double exceedance_probability_pairwise(const PosteriorChains& chains, Eigen::Index i);

// Max-rule estimate of P(v_i > v_j | data) for one ordered pair, i != j.
double exceedance_probability_maxrule(const PosteriorChains& chains, Eigen::Index i,
                                      Eigen::Index j);

// All n probabilities at once. The OpenMP kernel ranks each sweep's draws
// against a sorted copy; the serial variant is the reference double loop.
// Both accumulate integer counts, so their outputs agree bit for bit.
Eigen::VectorXd exceedance_probabilities(const PosteriorChains& chains, ProbRule rule);
Eigen::VectorXd exceedance_probabilities_serial(const PosteriorChains& chains, ProbRule rule);

// K(f_a, f_b) = int log(f_a/f_b) f_a dx from normal-kernel density estimates
// on a shared grid spanning both samples plus three bandwidths on each side
// (left edge truncated at 1e-12), trapezoidal rule, f_b floored at
// spec.density_floor, tiny negative results clamped to zero.
double kl_divergence_kde(std::span<const double> a, std::span<const double> b,
                         const KdeSpec& spec);
double kl_divergence_kde(const PosteriorChains& chains, Eigen::Index i, Eigen::Index j,
                         const KdeSpec& spec);

// KL(f_i) per the chosen mode; single_reference returns K(f_i, f_ref).
double mean_kl(const PosteriorChains& chains, Eigen::Index i, const KlMode& mode,
               const KdeSpec& spec);

// KL(f_i) for every observation (OpenMP over observations) and the serial
// reference. kl[reference] is zero in single-reference mode.
Eigen::VectorXd mean_kl_all(const PosteriorChains& chains, const KlMode& mode,
                            const KdeSpec& spec);
Eigen::VectorXd mean_kl_all_serial(const PosteriorChains& chains, const KlMode& mode,
                                   const KdeSpec& spec);

// Full per-observation report: probabilities, KL scores and the flag vector.
OutlierReport build_report(const PosteriorChains& chains, ProbRule rule, const KlMode& kl_mode,
                           const KdeSpec& spec, double flag_threshold = 0.10);

}  // namespace bqr
