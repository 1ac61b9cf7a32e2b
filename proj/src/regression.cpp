#include "mtreg/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mtreg/errors.hpp"
#include "mtreg/kernels.hpp"

namespace mtreg {
namespace {

void check_finite(std::span<const double> v, const char* who) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw DomainError(std::string(who) + ": values must be finite");
    }
  }
}

// Householder QR of the intercept-augmented design (column-major working
// copy). Returns the p x p upper triangle R packed row-major; `rhs`, when
// non-null, is replaced by Q^T rhs in place.
std::vector<double> householder_qr(const Design& design,
                                   std::vector<double>* rhs) {
  const int n = design.n();
  const int p = design.m() + 1;
  std::vector<std::vector<double>> col(p);
  col[0].assign(n, 1.0);
  for (int j = 1; j < p; ++j) col[j] = design.column(j - 1);

  std::vector<double> r(static_cast<std::size_t>(p) * p, 0.0);
  double max_diag = 0.0;
  for (int k = 0; k < p; ++k) {
    std::span<double> ck(col[k].data() + k, static_cast<std::size_t>(n - k));
    const double norm = std::sqrt(kernels::dot(ck, ck));
    const double rkk = ck[0] >= 0.0 ? -norm : norm;
    max_diag = std::max(max_diag, norm);
    if (norm < 1e-12 * max_diag || norm == 0.0) {
      // Column k is (numerically) a combination of earlier columns. Column 0
      // of the augmented matrix is the intercept; explanatory columns are
      // reported by their design index.
      throw SingularDesignError(
          "design is rank deficient: column " + std::to_string(k - 1) +
              " (0-based explanatory index) is collinear with earlier columns",
          k - 1);
    }
    // Householder vector v = ck - rkk * e1, applied as H = I - 2 vv^T / v^T v.
    std::vector<double> v(ck.begin(), ck.end());
    v[0] -= rkk;
    const double vtv = kernels::dot(v, v);
    r[static_cast<std::size_t>(k) * p + k] = rkk;
    for (int j = k + 1; j < p; ++j) {
      std::span<double> cj(col[j].data() + k, static_cast<std::size_t>(n - k));
      const double coef = -2.0 * kernels::dot(v, cj) / vtv;
      kernels::axpy(coef, v, cj);
      r[static_cast<std::size_t>(k) * p + j] = cj[0];
    }
    if (rhs != nullptr) {
      std::span<double> y(rhs->data() + k, static_cast<std::size_t>(n - k));
      const double coef = -2.0 * kernels::dot(v, y) / vtv;
      kernels::axpy(coef, v, y);
    }
    // The transformed column k below the diagonal is implicitly zero.
  }
  return r;
}

std::vector<double> back_substitute(const std::vector<double>& r, int p,
                                    std::span<const double> y) {
  std::vector<double> beta(p, 0.0);
  for (int i = p - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < p; ++j) {
      s -= r[static_cast<std::size_t>(i) * p + j] * beta[j];
    }
    beta[i] = s / r[static_cast<std::size_t>(i) * p + i];
  }
  return beta;
}

// diag of (A^T A)^{-1} = diag of R^{-1} R^{-T}: the k-th entry is the squared
// norm of the solution of R^T w = e_k (forward substitution).
std::vector<double> diag_from_r(const std::vector<double>& r, int p) {
  std::vector<double> diag(p, 0.0);
  std::vector<double> w(p, 0.0);
  for (int k = 0; k < p; ++k) {
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = k; i < p; ++i) {
      double s = (i == k) ? 1.0 : 0.0;
      for (int j = k; j < i; ++j) {
        s -= r[static_cast<std::size_t>(j) * p + i] * w[j];
      }
      w[i] = s / r[static_cast<std::size_t>(i) * p + i];
    }
    double ssq = 0.0;
    for (int i = k; i < p; ++i) ssq += w[i] * w[i];
    diag[k] = ssq;
  }
  return diag;
}

double unbiased_from_mle(double mle, int n, int df) {
  if (df <= 0) return std::numeric_limits<double>::quiet_NaN();
  return mle * static_cast<double>(n) / static_cast<double>(df);
}

}  // namespace

// ---------------------------------------------------------------------------
// Design

Design::Design(int n, int m, std::vector<double> row_major)
    : n_(n), m_(m), data_(std::move(row_major)) {
  if (n_ < 1 || m_ < 1) {
    throw ConstructionError("design: needs at least one row and one column");
  }
  if (data_.size() != static_cast<std::size_t>(n_) * m_) {
    throw ConstructionError("design: data size does not match n x m");
  }
  check_finite(data_, "design");
  if (n_ < m_ + 2) {
    throw InsufficientDataError(
        "design: needs at least m + 2 rows (n = " + std::to_string(n_) +
        ", m = " + std::to_string(m_) + ")");
  }
}

Design::Design(std::vector<std::vector<double>> rows)
    : Design(static_cast<int>(rows.size()),
             rows.empty() ? 0 : static_cast<int>(rows.front().size()),
             [&rows] {
               std::vector<double> flat;
               for (const auto& r : rows) {
                 if (r.size() != rows.front().size()) {
                   throw ConstructionError("design: ragged rows");
                 }
                 flat.insert(flat.end(), r.begin(), r.end());
               }
               return flat;
             }()) {}

Design::Design(std::span<const double> a)
    : Design(static_cast<int>(a.size()), 1,
             std::vector<double>(a.begin(), a.end())) {}

std::vector<double> Design::column(int j) const {
  std::vector<double> c(n_);
  for (int i = 0; i < n_; ++i) c[i] = at(i, j);
  return c;
}

// ---------------------------------------------------------------------------
// Moments

SampleStats sample_stats(std::span<const double> a,
                         std::span<const double> x) {
  if (a.size() != x.size()) {
    throw DomainError("sample_stats: paired samples must have equal length");
  }
  if (a.empty()) throw DomainError("sample_stats: needs at least one pair");
  check_finite(a, "sample_stats");
  check_finite(x, "sample_stats");
  const double n = static_cast<double>(a.size());
  SampleStats s;
  s.a_bar = kernels::sum(a) / n;
  s.x_bar = kernels::sum(x) / n;
  s.s_aa = kernels::sum_sq_dev(a, s.a_bar) / n;
  s.s_xx = kernels::sum_sq_dev(x, s.x_bar) / n;
  s.s_ax = kernels::centered_dot(a, s.a_bar, x, s.x_bar) / n;
  return s;
}

// ---------------------------------------------------------------------------
// Fits

RegressionFit fit_simple(std::span<const double> a,
                         std::span<const double> x) {
  if (a.size() != x.size()) {
    throw DomainError("fit_simple: samples must have equal length");
  }
  const int n = static_cast<int>(a.size());
  if (n < 3) {
    throw InsufficientDataError(
        "fit_simple: needs at least 3 observations, got " + std::to_string(n));
  }
  check_finite(a, "fit_simple");
  check_finite(x, "fit_simple");
  const SampleStats s = sample_stats(a, x);
  if (!(s.s_aa > 0.0)) {
    throw SingularDesignError(
        "fit_simple: explanatory values are constant (s_aa = 0)", 0);
  }
  RegressionFit fit;
  fit.n = n;
  fit.m = 1;
  const double slope = s.s_ax / s.s_aa;
  const double intercept = s.x_bar - slope * s.a_bar;
  fit.beta_hat = {intercept, slope};
  // Divisor-n variance by the moment identity; clamped against tiny negative
  // round-off on near-collinear data.
  fit.sigma_hat_sq_mle = std::max(0.0, s.s_xx - (s.s_ax * s.s_ax) / s.s_aa);
  fit.sigma_hat_sq_unbiased = unbiased_from_mle(fit.sigma_hat_sq_mle, n, n - 2);
  fit.residuals.resize(n);
  kernels::residual_linear(x, a, intercept, slope, fit.residuals);
  fit.xtx_inv_diag = {(1.0 + (s.a_bar * s.a_bar) / s.s_aa) / n,
                      1.0 / (n * s.s_aa)};
  fit.stats = s;
  return fit;
}

RegressionFit fit_glm(const Design& design, std::span<const double> x) {
  const int n = design.n();
  const int p = design.m() + 1;
  if (static_cast<int>(x.size()) != n) {
    throw DomainError("fit_glm: response length does not match the design");
  }
  check_finite(x, "fit_glm");
  std::vector<double> qtx(x.begin(), x.end());
  const std::vector<double> r = householder_qr(design, &qtx);
  RegressionFit fit;
  fit.n = n;
  fit.m = design.m();
  fit.beta_hat = back_substitute(r, p, qtx);

  fit.residuals.assign(x.begin(), x.end());
  for (int i = 0; i < n; ++i) {
    double yhat = fit.beta_hat[0];
    for (int j = 0; j < design.m(); ++j) {
      yhat += fit.beta_hat[j + 1] * design.at(i, j);
    }
    fit.residuals[i] -= yhat;
  }
  const double ssr = kernels::dot(fit.residuals, fit.residuals);
  fit.sigma_hat_sq_mle = ssr / n;
  fit.sigma_hat_sq_unbiased =
      unbiased_from_mle(fit.sigma_hat_sq_mle, n, n - p);
  fit.xtx_inv_diag = diag_from_r(r, p);
  if (design.m() == 1) fit.stats = sample_stats(design.column(0), x);
  return fit;
}

std::vector<double> design_xtx_inv_diag(const Design& design) {
  const std::vector<double> r = householder_qr(design, nullptr);
  return diag_from_r(r, design.m() + 1);
}

// ---------------------------------------------------------------------------
// The parallel measurement system

CausalSystem build_regression_system(const Design& design, SigmaMode mode) {
  if (mode.is_fixed && (!(mode.sigma > 0.0) || !std::isfinite(mode.sigma))) {
    throw DomainError(
        "build_regression_system: fixed sigma must be positive and finite");
  }
  if (!mode.is_fixed && mode.index != 1) {
    throw DomainError(
        "build_regression_system: the variable-scale mode reads sigma from "
        "leaf coordinate 1");
  }
  const int n = design.n();
  const int m = design.m();
  const int root_dim = mode.is_fixed ? m + 1 : m + 2;

  StateSpace root_space = mode.is_fixed
                              ? StateSpace::real(root_dim)
                              : StateSpace::real_with_positive_last(root_dim);
  StateSpace leaf_space = mode.is_fixed
                              ? StateSpace::real(1)
                              : StateSpace::real_with_positive_last(2);

  std::vector<int> parent(n + 1, 0);
  parent[0] = -1;
  TreeOrderedSet tree(0, std::move(parent));

  std::vector<StateSpace> spaces;
  spaces.reserve(n + 1);
  spaces.push_back(root_space);
  for (int i = 0; i < n; ++i) spaces.push_back(leaf_space);

  const bool fixed = mode.is_fixed;
  std::map<int, CausalMap> edges;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(design.row(i).begin(), design.row(i).end());
    CausalMap::Fn fn = [row, m, fixed](std::span<const double> beta) {
      double mu = beta[0];
      for (int j = 0; j < m; ++j) mu += beta[j + 1] * row[j];
      if (fixed) return std::vector<double>{mu};
      return std::vector<double>{mu, beta[m + 1]};
    };
    edges.emplace(i + 1, CausalMap(root_space, leaf_space, std::move(fn),
                                   "row " + std::to_string(i)));
  }

  Observable leaf = fixed ? make_normal_observable(SigmaMode::fixed(mode.sigma))
                          : make_normal_observable(SigmaMode::state_coordinate(1));
  std::map<int, Observable> observables;
  for (int i = 0; i < n; ++i) observables.emplace(i + 1, leaf);

  return CausalSystem(std::move(tree), std::move(spaces), std::move(edges),
                      std::move(observables));
}

}  // namespace mtreg
