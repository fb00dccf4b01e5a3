#include "bqr/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bqr/stats.hpp"

namespace bqr {

namespace {

std::span<const double> chain_of(const PosteriorChains& chains, Eigen::Index i) {
  // v is column-major, so one observation's chain is contiguous.
  return {chains.v.col(i).data(), static_cast<std::size_t>(chains.retained())};
}

void require_obs(const PosteriorChains& chains, Eigen::Index i, const char* where) {
  if (i < 0 || i >= chains.n_obs()) {
    throw std::invalid_argument(std::string(where) + ": observation index out of range");
  }
}

double silverman_bandwidth(std::span<const double> x) {
  const double sd = stddev(x);
  if (!(sd > 0.0)) throw std::invalid_argument("kl_divergence_kde: zero-variance sample");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double a = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * a * std::pow(static_cast<double>(x.size()), -0.2);
}

void kde_on_grid(std::span<const double> draws, double h, const std::vector<double>& grid,
                 std::vector<double>& out) {
  const double scale = 1.0 / (static_cast<double>(draws.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  out.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    double s = 0.0;
    for (const double d : draws) {
      const double u = (x - d) / h;
      s += std::exp(-0.5 * u * u);
    }
    out[g] = s * scale;
  }
}

double kl_between_samples(std::span<const double> a, std::span<const double> b,
                          const KdeSpec& spec) {
  const double ha = spec.bandwidth > 0.0 ? spec.bandwidth : silverman_bandwidth(a);
  const double hb = spec.bandwidth > 0.0 ? spec.bandwidth : silverman_bandwidth(b);

  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  double lo = std::min(*amin - 3.0 * ha, *bmin - 3.0 * hb);
  const double hi = std::max(*amax + 3.0 * ha, *bmax + 3.0 * hb);
  lo = std::max(lo, 1e-12);  // latent variables live on (0, inf)
  if (!(hi > lo)) throw std::invalid_argument("kl_divergence_kde: degenerate grid");

  const int g = spec.grid_points;
  const double dx = (hi - lo) / static_cast<double>(g - 1);
  std::vector<double> grid(static_cast<std::size_t>(g));
  for (int k = 0; k < g; ++k) grid[static_cast<std::size_t>(k)] = lo + dx * k;

  std::vector<double> fa, fb;
  kde_on_grid(a, ha, grid, fa);
  kde_on_grid(b, hb, grid, fb);

  std::vector<double> integrand(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double denom = std::max(fb[k], spec.density_floor);
    integrand[k] = fa[k] > 0.0 ? fa[k] * std::log(fa[k] / denom) : 0.0;
  }
  double kl = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) kl += 0.5 * (integrand[k] + integrand[k + 1]);
  kl *= dx;
  return kl > 0.0 ? kl : 0.0;
}

void require_nondegenerate(const PosteriorChains& chains, Eigen::Index i) {
  const auto c = chain_of(chains, i);
  if (!(stddev(c) > 0.0)) {
    throw std::invalid_argument("kl_divergence_kde: zero-variance latent chain for observation " +
                                std::to_string(i));
  }
}

double mean_kl_one(const PosteriorChains& chains, Eigen::Index i, const KlMode& mode,
                   const KdeSpec& spec) {
  const Eigen::Index n = chains.n_obs();
  if (mode.kind == KlMode::Kind::single_reference) {
    if (i == mode.reference) return 0.0;
    return kl_divergence_kde(chains, i, mode.reference, spec);
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) continue;
    total += kl_divergence_kde(chains, i, j, spec);
  }
  return total / static_cast<double>(n - 1);
}

}  // namespace

void KdeSpec::validate() const {
  if (grid_points < 64) throw std::invalid_argument("KdeSpec: grid_points must be >= 64");
  if (!(density_floor > 0.0 && density_floor <= 1e-8)) {
    throw std::invalid_argument("KdeSpec: density_floor must lie in (0, 1e-8]");
  }
}

double exceedance_probability_pairwise(const PosteriorChains& chains, Eigen::Index i) {
  require_obs(chains, i, "exceedance_probability_pairwise");
  const Eigen::Index n = chains.n_obs();
  const Eigen::Index m = chains.retained();
  if (n < 2) throw std::invalid_argument("exceedance_probability_pairwise: need n >= 2");
  std::int64_t count = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) continue;
    for (Eigen::Index l = 0; l < m; ++l) {
      if (chains.v(l, i) > chains.v(l, j)) ++count;
    }
  }
  return static_cast<double>(count) / (static_cast<double>(m) * static_cast<double>(n - 1));
}

double exceedance_probability_maxrule(const PosteriorChains& chains, Eigen::Index i,
                                      Eigen::Index j) {
  require_obs(chains, i, "exceedance_probability_maxrule");
  require_obs(chains, j, "exceedance_probability_maxrule");
  if (i == j) throw std::invalid_argument("exceedance_probability_maxrule: i and j must differ");
  const Eigen::Index m = chains.retained();
  const double cap = chains.v.col(j).maxCoeff();
  std::int64_t count = 0;
  for (Eigen::Index l = 0; l < m; ++l) {
    if (chains.v(l, i) > cap) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(m);
}

Eigen::VectorXd exceedance_probabilities_serial(const PosteriorChains& chains, ProbRule rule) {
  const Eigen::Index n = chains.n_obs();
  const Eigen::Index m = chains.retained();
  if (n < 2) throw std::invalid_argument("exceedance_probabilities: need n >= 2");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
  if (rule == ProbRule::pairwise) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        for (Eigen::Index l = 0; l < m; ++l) {
          if (chains.v(l, i) > chains.v(l, j)) ++counts[static_cast<std::size_t>(i)];
        }
      }
    }
  } else {
    Eigen::VectorXd caps = chains.v.colwise().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        for (Eigen::Index l = 0; l < m; ++l) {
          if (chains.v(l, i) > caps[j]) ++counts[static_cast<std::size_t>(i)];
        }
      }
    }
  }
  Eigen::VectorXd prob(n);
  const double denom = static_cast<double>(m) * static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) prob[i] = static_cast<double>(counts[static_cast<std::size_t>(i)]) / denom;
  return prob;
}

Eigen::VectorXd exceedance_probabilities(const PosteriorChains& chains, ProbRule rule) {
  const Eigen::Index n = chains.n_obs();
  const Eigen::Index m = chains.retained();
  if (n < 2) throw std::invalid_argument("exceedance_probabilities: need n >= 2");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);

  if (rule == ProbRule::pairwise) {
    // Rank each sweep's draws in a sorted copy: the number of strictly
    // smaller entries in row l equals the count of j with v_j^(l) < v_i^(l).
#pragma omp parallel
    {
      std::vector<std::int64_t> local(static_cast<std::size_t>(n), 0);
      std::vector<double> row(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
      for (Eigen::Index l = 0; l < m; ++l) {
        for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = chains.v(l, j);
        std::sort(row.begin(), row.end());
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto it = std::lower_bound(row.begin(), row.end(), chains.v(l, i));
          local[static_cast<std::size_t>(i)] += it - row.begin();
        }
      }
#pragma omp critical
      for (Eigen::Index i = 0; i < n; ++i) counts[static_cast<std::size_t>(i)] += local[static_cast<std::size_t>(i)];
    }
  } else {
    // Sorted chain maxima; a draw's rank among them counts every j whose
    // whole chain stays below it. The draw never exceeds its own chain's
    // maximum, so j = i contributes nothing.
    std::vector<double> caps(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) caps[static_cast<std::size_t>(j)] = chains.v.col(j).maxCoeff();
    std::sort(caps.begin(), caps.end());
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      std::int64_t c = 0;
      for (Eigen::Index l = 0; l < m; ++l) {
        const auto it = std::lower_bound(caps.begin(), caps.end(), chains.v(l, i));
        c += it - caps.begin();
      }
      counts[static_cast<std::size_t>(i)] = c;
    }
  }

  Eigen::VectorXd prob(n);
  const double denom = static_cast<double>(m) * static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) prob[i] = static_cast<double>(counts[static_cast<std::size_t>(i)]) / denom;
  return prob;
}

double kl_divergence_kde(std::span<const double> a, std::span<const double> b,
                         const KdeSpec& spec) {
  spec.validate();
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("kl_divergence_kde: need at least two draws per sample");
  }
  return kl_between_samples(a, b, spec);
}

double kl_divergence_kde(const PosteriorChains& chains, Eigen::Index i, Eigen::Index j,
                         const KdeSpec& spec) {
  spec.validate();
  require_obs(chains, i, "kl_divergence_kde");
  require_obs(chains, j, "kl_divergence_kde");
  if (i == j) throw std::invalid_argument("kl_divergence_kde: i and j must differ");
  require_nondegenerate(chains, i);
  require_nondegenerate(chains, j);
  return kl_between_samples(chain_of(chains, i), chain_of(chains, j), spec);
}

double mean_kl(const PosteriorChains& chains, Eigen::Index i, const KlMode& mode,
               const KdeSpec& spec) {
  spec.validate();
  require_obs(chains, i, "mean_kl");
  if (mode.kind == KlMode::Kind::single_reference) require_obs(chains, mode.reference, "mean_kl");
  if (chains.n_obs() < 2) throw std::invalid_argument("mean_kl: need n >= 2");
  return mean_kl_one(chains, i, mode, spec);
}

Eigen::VectorXd mean_kl_all_serial(const PosteriorChains& chains, const KlMode& mode,
                                   const KdeSpec& spec) {
  spec.validate();
  const Eigen::Index n = chains.n_obs();
  if (mode.kind == KlMode::Kind::single_reference) {
    require_obs(chains, mode.reference, "mean_kl_all");
  }
  Eigen::VectorXd kl(n);
  for (Eigen::Index i = 0; i < n; ++i) kl[i] = mean_kl_one(chains, i, mode, spec);
  return kl;
}

Eigen::VectorXd mean_kl_all(const PosteriorChains& chains, const KlMode& mode,
                            const KdeSpec& spec) {
  spec.validate();
  const Eigen::Index n = chains.n_obs();
  if (mode.kind == KlMode::Kind::single_reference) {
    require_obs(chains, mode.reference, "mean_kl_all");
  }
  Eigen::VectorXd kl(n);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < n; ++i) kl[i] = mean_kl_one(chains, i, mode, spec);
  return kl;
}

OutlierReport build_report(const PosteriorChains& chains, ProbRule rule, const KlMode& kl_mode,
                           const KdeSpec& spec, double flag_threshold) {
  if (chains.n_obs() < 2) throw std::invalid_argument("build_report: need n >= 2");
  OutlierReport report;
  report.tau = chains.tau;
  report.flag_threshold = flag_threshold;
  report.prob = exceedance_probabilities(chains, rule);
  report.kl = mean_kl_all(chains, kl_mode, spec);
  if (kl_mode.kind == KlMode::Kind::single_reference) report.kl_reference = kl_mode.reference;
  report.flagged.resize(static_cast<std::size_t>(chains.n_obs()));
  for (Eigen::Index i = 0; i < chains.n_obs(); ++i) {
    report.flagged[static_cast<std::size_t>(i)] = report.prob[i] > flag_threshold ? 1 : 0;
  }
  return report;
}

}  // namespace bqr
