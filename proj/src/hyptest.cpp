#include "mtreg/hyptest.hpp"

#include <cmath>
#include <limits>

#include "mtreg/errors.hpp"
#include "mtreg/student_t.hpp"

namespace mtreg {
namespace {

void check_coefficient(const RegressionFit& fit, int k) {
  if (k < 0 || k >= static_cast<int>(fit.beta_hat.size())) {
    throw DomainError("coefficient index " + std::to_string(k) +
                      " out of range (fit has " +
                      std::to_string(fit.beta_hat.size()) + " coefficients)");
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1)");
  }
}

double sigma_sq_for(const RegressionFit& fit, DivisorMode mode) {
  switch (mode) {
    case DivisorMode::paper_verbatim:
      return fit.sigma_hat_sq_mle;
    case DivisorMode::exact:
      return fit.sigma_hat_sq_unbiased;
  }
  throw DomainError("unknown divisor mode");
}

}  // namespace

std::string to_string(DivisorMode mode) {
  return mode == DivisorMode::paper_verbatim ? "paper-verbatim" : "exact";
}

SemiDistance::SemiDistance(const RegressionFit& fit, int k, DivisorMode mode)
    : k_(k), mode_(mode) {
  check_coefficient(fit, k);
  if (fit.df() <= 0) {
    throw InsufficientDataError(
        "studentization needs n - m - 1 >= 1 residual degrees of freedom");
  }
  const double sigma_sq = sigma_sq_for(fit, mode);
  if (!(sigma_sq >= 0.0)) {
    throw DomainError("studentization: variance estimate is not finite");
  }
  scale_ = std::sqrt(sigma_sq * fit.xtx_inv_diag[k]);
}

double SemiDistance::operator()(double u, double v) const {
  const double diff = std::abs(u - v);
  if (scale_ > 0.0) return diff / scale_;
  // Degenerate (zero residual variance): distinct points are infinitely far
  // apart, coincident points at distance zero.
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double eta_threshold(const RegressionFit& fit, double alpha) {
  check_alpha(alpha);
  if (fit.df() <= 0) {
    throw InsufficientDataError(
        "eta threshold needs n - m - 1 >= 1 degrees of freedom");
  }
  return t_upper_point(alpha, fit.df());
}

bool IntervalReport::contains(double value) const {
  if (scale > 0.0) return std::abs(center - value) / scale < eta;
  return value == center;
}

IntervalReport confidence_interval(const RegressionFit& fit, int k,
                                   double alpha, DivisorMode mode) {
  check_coefficient(fit, k);
  check_alpha(alpha);
  const SemiDistance d(fit, k, mode);
  const double eta = eta_threshold(fit, alpha);
  IntervalReport out;
  out.k = k;
  out.alpha = alpha;
  out.mode = mode;
  out.center = fit.beta_hat[k];
  out.scale = d.scale();
  out.eta = eta;
  out.half_width = eta * d.scale();
  out.lo = out.center - out.half_width;
  out.hi = out.center + out.half_width;
  return out;
}

TestReport hypothesis_test(const RegressionFit& fit, int k, double null_value,
                           double alpha, DivisorMode mode) {
  check_coefficient(fit, k);
  check_alpha(alpha);
  if (!std::isfinite(null_value)) {
    throw DomainError("hypothesis_test: null value must be finite");
  }
  const SemiDistance d(fit, k, mode);
  const double eta = eta_threshold(fit, alpha);
  TestReport out;
  out.k = k;
  out.null_value = null_value;
  out.alpha = alpha;
  out.mode = mode;
  out.statistic = d(fit.beta_hat[k], null_value);
  out.threshold = eta;
  out.rejected = out.statistic >= eta;
  return out;
}

}  // namespace mtreg
