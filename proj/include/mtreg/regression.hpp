#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mtreg/causality.hpp"
#include "mtreg/observable.hpp"

namespace mtreg {

// Explanatory data: n rows, m variables; the intercept column of ones is
// implicit and never stored.
class Design {
public:
  Design(int n, int m, std::vector<double> row_major);
  explicit Design(std::vector<std::vector<double>> rows);
  // Single explanatory variable.
  explicit Design(std::span<const double> a);

  int n() const { return n_; }
  int m() const { return m_; }
  double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * m_ + j]; }
  std::vector<double> column(int j) const;
  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * m_,
            static_cast<std::size_t>(m_)};
  }

private:
  int n_ = 0;
  int m_ = 0;
  std::vector<double> data_;  // row-major, n x m
};

// Divisor-n moments of a paired sample.
struct SampleStats {
  double a_bar = 0.0;
  double x_bar = 0.0;
  double s_aa = 0.0;
  double s_xx = 0.0;
  double s_ax = 0.0;
};

SampleStats sample_stats(std::span<const double> a, std::span<const double> x);

struct RegressionFit {
  std::vector<double> beta_hat;            // m + 1 coefficients, intercept first
  double sigma_hat_sq_mle = 0.0;           // divisor n
  double sigma_hat_sq_unbiased = 0.0;      // divisor n - m - 1 (NaN if df == 0)
  std::vector<double> residuals;
  std::vector<double> xtx_inv_diag;        // diag of (A^T A)^{-1}, intercept first
  int n = 0;
  int m = 0;
  std::optional<SampleStats> stats;        // present for single-variable fits

  int df() const { return n - m - 1; }
};

// Single-variable fit by the closed forms: slope s_ax / s_aa, intercept
// x_bar - slope * a_bar, divisor-n variance s_xx - s_ax^2 / s_aa.
RegressionFit fit_simple(std::span<const double> a, std::span<const double> x);

// General fit by Householder QR on the intercept-augmented design. A rank
// deficiency reports the offending column.
RegressionFit fit_glm(const Design& design, std::span<const double> x);

// Diagonal of (A^T A)^{-1} for the intercept-augmented design; the state-free
// part of the coefficient variance formulas.
std::vector<double> design_xtx_inv_diag(const Design& design);

// The parallel measurement system behind the fits: a root parameter node
// with one edge per data row ending in a normal leaf observable.
CausalSystem build_regression_system(const Design& design, SigmaMode mode);

}  // namespace mtreg
