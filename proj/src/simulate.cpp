#include "mtreg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "mtreg/causality.hpp"
#include "mtreg/errors.hpp"
#include "mtreg/kernels.hpp"
#include "mtreg/rng.hpp"
#include "mtreg/student_t.hpp"

namespace mtreg {
namespace {

int effective_threads(long replications) {
  long want = 0;
  if (const char* env = std::getenv("MTREG_THREADS")) {
    char* end = nullptr;
    want = std::strtol(env, &end, 10);
    if (end == env || want < 0) want = 0;
  }
  if (want == 0) {
    want = static_cast<long>(std::thread::hardware_concurrency());
    if (want < 1) want = 1;
  }
  return static_cast<int>(std::min<long>(want, std::max<long>(replications, 1)));
}

void validate_plan(const SimulationPlan& plan) {
  const int m = plan.design.m();
  if (static_cast<int>(plan.truth.beta.size()) != m + 1) {
    throw DomainError("simulation plan: truth needs m + 1 coefficients");
  }
  if (!(plan.truth.sigma > 0.0) || !std::isfinite(plan.truth.sigma)) {
    throw DomainError("simulation plan: sigma must be positive and finite");
  }
  if (plan.replications < 1) {
    throw DomainError("simulation plan: needs at least one replication");
  }
  if (!(plan.alpha > 0.0) || !(plan.alpha < 1.0)) {
    throw DomainError("simulation plan: alpha must lie in (0, 1)");
  }
  if (plan.divisor_modes.empty()) {
    throw DomainError("simulation plan: needs at least one divisor mode");
  }
  if (plan.design.n() - m - 1 < 1) {
    throw InsufficientDataError(
        "simulation plan: design leaves no residual degrees of freedom");
  }
}

// Runs fn(r) for r in [0, replications) across the worker pool. Each index
// is processed exactly once; outputs must go to per-index slots.
template <typename Fn>
void parallel_for(long replications, const Fn& fn) {
  const int workers = effective_threads(replications);
  if (workers <= 1) {
    for (long r = 0; r < replications; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([w, workers, replications, &fn] {
      for (long r = w; r < replications; r += workers) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

double mean_of(std::span<const double> v) {
  return kernels::sum(v) / static_cast<double>(v.size());
}

// Across-replication sample variance (divisor R - 1).
double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  return kernels::sum_sq_dev(v, m) / static_cast<double>(v.size() - 1);
}

struct ReplicationData {
  // beta_hat[k][r]; scale[mode][k][r] for the studentized pivots.
  std::vector<std::vector<double>> beta_hat;
  std::vector<std::vector<std::vector<double>>> scale;
};

// Draws and refits every replication; the shared workhorse of both reports.
ReplicationData run_replications(const SimulationPlan& plan) {
  const int m = plan.design.m();
  const int p = m + 1;
  const long reps = plan.replications;
  const std::size_t n_modes = plan.divisor_modes.size();

  // Surface a singular design before any sampling happens.
  const std::vector<double> diag = design_xtx_inv_diag(plan.design);
  (void)diag;

  const CausalSystem system =
      build_regression_system(plan.design, SigmaMode::fixed(plan.truth.sigma));
  const Observable composite = composite_observable(system);
  const State truth(plan.truth.beta, composite.state_space());

  ReplicationData data;
  data.beta_hat.assign(p, std::vector<double>(reps, 0.0));
  data.scale.assign(n_modes,
                    std::vector<std::vector<double>>(
                        p, std::vector<double>(reps, 0.0)));

  const std::vector<double> col0 =
      (m == 1) ? plan.design.column(0) : std::vector<double>{};
  parallel_for(reps, [&](long r) {
    const std::uint64_t seed =
        rng::substream_seed(plan.master_seed, static_cast<std::uint64_t>(r));
    const std::vector<std::vector<double>> draw =
        composite.sample(truth, seed, 1);
    const std::vector<double>& x = draw.front();
    const RegressionFit fit =
        (m == 1) ? fit_simple(col0, x) : fit_glm(plan.design, x);
    for (int k = 0; k < p; ++k) {
      data.beta_hat[k][r] = fit.beta_hat[k];
      for (std::size_t mi = 0; mi < n_modes; ++mi) {
        const SemiDistance d(fit, k, plan.divisor_modes[mi]);
        data.scale[mi][k][r] = d.scale();
      }
    }
  });
  return data;
}

}  // namespace

CoverageReport run_coverage(const SimulationPlan& plan) {
  validate_plan(plan);
  const int p = plan.design.m() + 1;
  const long reps = plan.replications;
  const std::size_t n_modes = plan.divisor_modes.size();

  const ReplicationData data = run_replications(plan);
  const double eta = t_upper_point(plan.alpha, plan.design.n() - p);
  const std::vector<double> diag = design_xtx_inv_diag(plan.design);

  CoverageReport report;
  report.replications = reps;
  report.master_seed = plan.master_seed;
  report.alpha = plan.alpha;

  for (int k = 0; k < p; ++k) {
    for (std::size_t mi = 0; mi < n_modes; ++mi) {
      const double beta_k = plan.truth.beta[k];
      long covered = 0;
      long rejected = 0;
      for (long r = 0; r < reps; ++r) {
        const double diff = std::abs(data.beta_hat[k][r] - beta_k);
        const double scale = data.scale[mi][k][r];
        // The same inequality as SemiDistance / IntervalReport::contains.
        const bool contains =
            scale > 0.0 ? (diff / scale < eta) : (diff == 0.0);
        if (contains) ++covered; else ++rejected;
      }
      CoverageRow row;
      row.k = k;
      row.mode = plan.divisor_modes[mi];
      row.empirical_coverage = static_cast<double>(covered) / reps;
      row.empirical_rejection_rate = static_cast<double>(rejected) / reps;
      row.empirical_var_beta = sample_variance(data.beta_hat[k]);
      row.formula_var_beta = plan.truth.sigma * plan.truth.sigma * diag[k];
      report.rows.push_back(row);
    }
  }
  return report;
}

StudentizationSummary run_studentization_check(const SimulationPlan& plan) {
  validate_plan(plan);
  const int p = plan.design.m() + 1;
  const int df = plan.design.n() - p;
  const long reps = plan.replications;
  const std::size_t n_modes = plan.divisor_modes.size();

  const ReplicationData data = run_replications(plan);

  StudentizationSummary summary;
  summary.replications = reps;
  summary.master_seed = plan.master_seed;
  summary.df = df;

  for (int k = 0; k < p; ++k) {
    for (std::size_t mi = 0; mi < n_modes; ++mi) {
      StudentizationRow row;
      row.k = k;
      row.mode = plan.divisor_modes[mi];
      row.applicable = reps >= 2;
      std::vector<double> pivots(reps, 0.0);
      for (long r = 0; r < reps; ++r) {
        const double scale = data.scale[mi][k][r];
        const double diff = data.beta_hat[k][r] - plan.truth.beta[k];
        pivots[r] = scale > 0.0
                        ? diff / scale
                        : std::numeric_limits<double>::quiet_NaN();
      }
      row.sample_mean = mean_of(pivots);
      row.sample_stddev = std::sqrt(sample_variance(pivots));
      if (row.applicable) {
        std::sort(pivots.begin(), pivots.end());
        double ks = 0.0;
        for (long i = 0; i < reps; ++i) {
          const double cdf = t_cdf(pivots[i], df);
          const double lo_step = static_cast<double>(i) / reps;
          const double hi_step = static_cast<double>(i + 1) / reps;
          ks = std::max(ks, std::max(cdf - lo_step, hi_step - cdf));
        }
        row.ks_distance = ks;
      }
      summary.rows.push_back(row);
    }
  }
  return summary;
}

}  // namespace mtreg
