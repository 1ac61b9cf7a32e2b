#pragma once

#include <cstdint>
#include <vector>

#include "mtreg/hyptest.hpp"
#include "mtreg/regression.hpp"

namespace mtreg {

// Ground truth for synthetic draws: coefficients (intercept first) and the
// noise scale.
struct TrueState {
  std::vector<double> beta;
  double sigma = 1.0;
};

struct SimulationPlan {
  Design design;
  TrueState truth;
  long replications = 10000;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  std::vector<DivisorMode> divisor_modes = {DivisorMode::exact};
};

struct CoverageRow {
  int k = 0;
  DivisorMode mode = DivisorMode::exact;
  double empirical_coverage = 0.0;        // CI contains the true coefficient
  double empirical_rejection_rate = 0.0;  // test of the true value rejects
  double empirical_var_beta = 0.0;        // across-replication variance of beta_hat_k
  double formula_var_beta = 0.0;          // sigma^2 * diag_k((A^T A)^{-1})
};

struct CoverageReport {
  long replications = 0;
  std::uint64_t master_seed = 0;
  double alpha = 0.0;
  std::vector<CoverageRow> rows;  // one per (coefficient, divisor mode)
};

// Samples the composite observable of the regression system at the true
// state, refits every replication, and scores interval coverage and test
// size per coefficient and divisor mode. Replication r uses the substream
// seed mixed from (master_seed, r); results are bitwise independent of the
// worker-thread count (MTREG_THREADS caps parallelism).
CoverageReport run_coverage(const SimulationPlan& plan);

struct StudentizationRow {
  int k = 0;
  DivisorMode mode = DivisorMode::exact;
  bool applicable = false;   // false when replications < 2
  double ks_distance = 0.0;  // sup gap to the t CDF with n - m - 1 df
  double sample_mean = 0.0;
  double sample_stddev = 0.0;
};

struct StudentizationSummary {
  long replications = 0;
  std::uint64_t master_seed = 0;
  int df = 0;
  std::vector<StudentizationRow> rows;
};

// Distribution of the studentized pivots (beta_hat_k - beta_k) / scale_k
// against the t reference with n - m - 1 degrees of freedom.
StudentizationSummary run_studentization_check(const SimulationPlan& plan);

}  // namespace mtreg
