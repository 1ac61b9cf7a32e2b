#pragma once

#include <string>

#include "mtreg/regression.hpp"

namespace mtreg {

// Which divisor enters the variance estimate inside the studentized factor:
// paper_verbatim keeps the divisor-n estimate, exact uses n - m - 1.
enum class DivisorMode { paper_verbatim, exact };

std::string to_string(DivisorMode mode);

// The coefficient-k semi-distance d(u, v) = |u - v| / scale with
// scale = sqrt(sigma_hat_sq * diag_k((A^T A)^{-1})). The same primitive
// drives the test statistic, the rejection rule, and interval membership,
// so the interval/test duality holds exactly, not just in algebra.
class SemiDistance {
public:
  SemiDistance(const RegressionFit& fit, int k, DivisorMode mode);

  double scale() const { return scale_; }
  double operator()(double u, double v) const;

  int k() const { return k_; }
  DivisorMode mode() const { return mode_; }

private:
  double scale_ = 0.0;
  int k_ = 0;
  DivisorMode mode_ = DivisorMode::exact;
};

// Threshold eta: the upper alpha/2 point of the t distribution with
// n - m - 1 degrees of freedom (both divisor modes use the same threshold).
double eta_threshold(const RegressionFit& fit, double alpha);

struct IntervalReport {
  int k = 0;
  double alpha = 0.0;
  DivisorMode mode = DivisorMode::exact;
  double center = 0.0;
  double half_width = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double eta = 0.0;
  double scale = 0.0;

  // Membership via the defining inequality d(center, value) < eta; agrees
  // with [lo, hi] up to the boundary.
  bool contains(double value) const;
};

struct TestReport {
  int k = 0;
  double null_value = 0.0;
  double alpha = 0.0;
  DivisorMode mode = DivisorMode::exact;
  double statistic = 0.0;
  double threshold = 0.0;
  bool rejected = false;
};

IntervalReport confidence_interval(const RegressionFit& fit, int k,
                                   double alpha, DivisorMode mode);

TestReport hypothesis_test(const RegressionFit& fit, int k, double null_value,
                           double alpha, DivisorMode mode);

}  // namespace mtreg
