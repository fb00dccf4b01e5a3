// Compares the OpenMP diagnostic kernels against their serial references on
// synthetic latent chains and checks that the two paths agree exactly.

#include <chrono>
#include <cstdio>
#include <string>

#include "bqr/outlier.hpp"
#include "bqr/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

bqr::PosteriorChains synthetic_chains(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  bqr::RngStream rng(seed);
  bqr::PosteriorChains chains;
  chains.v.resize(m, n);
  chains.beta.resize(m, 1);
  chains.sigma.resize(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    // spread of per-observation scales, the last chain clearly detached
    const double scale = 0.2 + 0.8 * rng.uniform01() + (i == n - 1 ? 4.0 : 0.0);
    for (Eigen::Index l = 0; l < m; ++l) {
      chains.v(l, i) = rng.exponential(scale) + 1e-3;
    }
  }
  chains.sigma.setOnes();
  chains.beta.setZero();
  return chains;
}

template <typename F>
double time_best_of(int repeats, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = clock_type::now();
    fn();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, double max_diff) {
  std::printf("%-28s serial %9.4f s   parallel %9.4f s   speedup %5.2fx   max|diff| %g\n", name,
              serial_s, parallel_s, serial_s / parallel_s, max_diff);
}

}  // namespace

int main(int argc, char** argv) {
  Eigen::Index n = 200;
  Eigen::Index m = 2000;
  if (argc > 1) n = std::stol(argv[1]);
  if (argc > 2) m = std::stol(argv[2]);

#ifdef _OPENMP
  std::printf("threads: %d, n = %ld observations, M = %ld draws\n", omp_get_max_threads(),
              static_cast<long>(n), static_cast<long>(m));
#else
  std::printf("built without OpenMP, n = %ld, M = %ld\n", static_cast<long>(n),
              static_cast<long>(m));
#endif

  const bqr::PosteriorChains chains = synthetic_chains(n, m, 20240913);

  {
    Eigen::VectorXd serial, parallel;
    const double ts = time_best_of(3, [&] {
      serial = bqr::exceedance_probabilities_serial(chains, bqr::ProbRule::pairwise);
    });
    const double tp = time_best_of(3, [&] {
      parallel = bqr::exceedance_probabilities(chains, bqr::ProbRule::pairwise);
    });
    report("exceedance pairwise", ts, tp, (serial - parallel).cwiseAbs().maxCoeff());
  }
  {
    Eigen::VectorXd serial, parallel;
    const double ts = time_best_of(3, [&] {
      serial = bqr::exceedance_probabilities_serial(chains, bqr::ProbRule::maxrule);
    });
    const double tp = time_best_of(3, [&] {
      parallel = bqr::exceedance_probabilities(chains, bqr::ProbRule::maxrule);
    });
    report("exceedance maxrule", ts, tp, (serial - parallel).cwiseAbs().maxCoeff());
  }
  {
    const bqr::KdeSpec spec;
    const bqr::KlMode mode = bqr::KlMode::single_reference(0);
    Eigen::VectorXd serial, parallel;
    const double ts = time_best_of(1, [&] { serial = bqr::mean_kl_all_serial(chains, mode, spec); });
    const double tp = time_best_of(1, [&] { parallel = bqr::mean_kl_all(chains, mode, spec); });
    report("KL single reference", ts, tp, (serial - parallel).cwiseAbs().maxCoeff());
  }

  return 0;
}
