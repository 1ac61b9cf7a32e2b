#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "mtreg/errors.hpp"
#include "mtreg/hyptest.hpp"
#include "mtreg/student_t.hpp"

using namespace mtreg;

namespace {

std::vector<double> random_vec(std::mt19937_64& gen, int n, double lo,
                               double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(gen);
  return v;
}

}  // namespace

TEST_CASE("golden dataset: interval endpoints and statistic") {
  const std::vector<double> a = {0.0, 1.0, 2.0};
  const std::vector<double> x = {1.0, 1.0, 3.0};
  const RegressionFit fit = fit_simple(a, x);

  // Paper-verbatim slope interval: scale = sqrt((2/9) * 1/2) = 1/3 and
  // eta = t_1(0.975), so the interval is 1 +/- 12.70620.../3.
  const IntervalReport ci =
      confidence_interval(fit, 1, 0.05, DivisorMode::paper_verbatim);
  CHECK(ci.center == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ci.scale == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(ci.eta == doctest::Approx(12.706204736174705).epsilon(1e-12));
  CHECK(ci.lo == doctest::Approx(1.0 - 12.706204736174705 / 3.0).epsilon(1e-12));
  CHECK(ci.hi == doctest::Approx(1.0 + 12.706204736174705 / 3.0).epsilon(1e-12));
  CHECK(ci.contains(0.0));
  CHECK(ci.contains(5.0));
  CHECK(!ci.contains(5.3));
  CHECK(!ci.contains(-3.3));

  const TestReport t0 =
      hypothesis_test(fit, 1, 0.0, 0.05, DivisorMode::paper_verbatim);
  CHECK(t0.statistic == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(t0.threshold == ci.eta);
  CHECK(!t0.rejected);

  // Exact mode rescales the statistic by sqrt((n - 2) / n).
  const TestReport te = hypothesis_test(fit, 1, 0.0, 0.05, DivisorMode::exact);
  CHECK(te.statistic ==
        doctest::Approx(3.0 * std::sqrt(1.0 / 3.0)).epsilon(1e-13));
  CHECK(!te.rejected);
}

TEST_CASE("the statistic in the two divisor modes differs by sqrt(df/n)") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(gen() % 30);
    const auto a = random_vec(gen, n, -3.0, 3.0);
    auto x = random_vec(gen, n, -2.0, 2.0);
    for (int i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] += 0.7 * a[static_cast<std::size_t>(i)];
    const RegressionFit fit = fit_simple(a, x);
    if (fit.sigma_hat_sq_mle == 0.0) continue;
    for (int k = 0; k < 2; ++k) {
      const double null_value = 0.3;
      const double tp =
          hypothesis_test(fit, k, null_value, 0.05, DivisorMode::paper_verbatim)
              .statistic;
      const double tx =
          hypothesis_test(fit, k, null_value, 0.05, DivisorMode::exact)
              .statistic;
      CHECK(tx == doctest::Approx(tp * std::sqrt(
                                           static_cast<double>(fit.df()) / n))
                      .epsilon(1e-12));
    }
  }
}

TEST_CASE("test/interval duality holds exactly, boundary included") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> alpha_d(0.002, 0.5);
  const double nudges[] = {0.0, 0.25, 0.5, 0.9, 0.999, 1.0, 1.001, 1.5, 3.0};
  int checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const int n = 4 + static_cast<int>(gen() % 30);
    const auto a = random_vec(gen, n, -3.0, 3.0);
    auto x = random_vec(gen, n, -1.0, 1.0);
    for (int i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] +=
          1.5 - 0.4 * a[static_cast<std::size_t>(i)];
    const RegressionFit fit = fit_simple(a, x);
    const double alpha = alpha_d(gen);
    for (DivisorMode mode :
         {DivisorMode::paper_verbatim, DivisorMode::exact}) {
      for (int k = 0; k < 2; ++k) {
        const IntervalReport ci = confidence_interval(fit, k, alpha, mode);
        for (double u : nudges) {
          for (double sign : {-1.0, 1.0}) {
            const double value = ci.center + sign * u * ci.half_width;
            const TestReport t = hypothesis_test(fit, k, value, alpha, mode);
            CHECK(t.rejected == !ci.contains(value));
            ++checked;
          }
        }
      }
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("degenerate fit: zero residual variance") {
  // x = 1 + 2a exactly, in exactly representable arithmetic.
  const std::vector<double> a = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> x = {1.0, 3.0, 5.0, 7.0};
  const RegressionFit fit = fit_simple(a, x);
  REQUIRE(fit.sigma_hat_sq_mle == 0.0);
  for (DivisorMode mode : {DivisorMode::paper_verbatim, DivisorMode::exact}) {
    const IntervalReport ci = confidence_interval(fit, 1, 0.05, mode);
    CHECK(ci.scale == 0.0);
    CHECK(ci.half_width == 0.0);
    CHECK(ci.lo == ci.center);
    CHECK(ci.hi == ci.center);
    CHECK(ci.contains(2.0));       // the point itself
    CHECK(!ci.contains(2.00001));  // anything else is infinitely far
    const TestReport at = hypothesis_test(fit, 1, 2.0, 0.05, mode);
    CHECK(at.statistic == 0.0);
    CHECK(!at.rejected);
    const TestReport off = hypothesis_test(fit, 1, 2.5, 0.05, mode);
    CHECK(std::isinf(off.statistic));
    CHECK(off.rejected);
    CHECK(off.rejected == !ci.contains(2.5));
  }
}

TEST_CASE("intervals nest as alpha shrinks") {
  std::mt19937_64 gen(8);
  const auto a = random_vec(gen, 12, -2.0, 2.0);
  auto x = random_vec(gen, 12, -0.5, 0.5);
  for (int i = 0; i < 12; ++i)
    x[static_cast<std::size_t>(i)] += 2.0 * a[static_cast<std::size_t>(i)];
  const RegressionFit fit = fit_simple(a, x);
  for (int k = 0; k < 2; ++k) {
    const IntervalReport c01 =
        confidence_interval(fit, k, 0.01, DivisorMode::exact);
    const IntervalReport c05 =
        confidence_interval(fit, k, 0.05, DivisorMode::exact);
    const IntervalReport c10 =
        confidence_interval(fit, k, 0.10, DivisorMode::exact);
    CHECK(c01.lo < c05.lo);
    CHECK(c05.lo < c10.lo);
    CHECK(c10.hi < c05.hi);
    CHECK(c05.hi < c01.hi);
    CHECK(c01.center == c05.center);
    CHECK(c05.center == c10.center);
  }
}

TEST_CASE("semi-distance axioms") {
  std::mt19937_64 gen(9);
  const auto a = random_vec(gen, 10, -2.0, 2.0);
  const auto x = random_vec(gen, 10, -2.0, 2.0);
  const RegressionFit fit = fit_simple(a, x);
  const SemiDistance d(fit, 1, DivisorMode::exact);
  std::uniform_real_distribution<double> pt(-10.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double u = pt(gen);
    const double v = pt(gen);
    const double w = pt(gen);
    CHECK(d(u, u) == 0.0);
    CHECK(d(u, v) == d(v, u));
    CHECK(d(u, v) >= 0.0);
    CHECK(d(u, w) <= d(u, v) + d(v, w) + 1e-9 * (1.0 + d(u, w)));
  }
}

TEST_CASE("eta_threshold is the upper alpha/2 t point") {
  std::mt19937_64 gen(10);
  const auto a = random_vec(gen, 13, -2.0, 2.0);
  const auto x = random_vec(gen, 13, -2.0, 2.0);
  const RegressionFit fit = fit_simple(a, x);  // df = 11
  REQUIRE(fit.df() == 11);
  for (double alpha : {0.01, 0.05, 0.2}) {
    CHECK(eta_threshold(fit, alpha) == t_upper_point(alpha, 11));
    CHECK(eta_threshold(fit, alpha) == t_quantile(1.0 - alpha / 2.0, 11));
  }
}

TEST_CASE("multi-variable fits feed the same machinery") {
  std::mt19937_64 gen(12);
  const int n = 20;
  const int m = 3;
  std::vector<std::vector<double>> rows(n, std::vector<double>(m));
  for (auto& r : rows)
    for (double& v : r) v = std::uniform_real_distribution<double>(-2, 2)(gen);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    x[static_cast<std::size_t>(i)] =
        1.0 + 0.5 * r[0] - 2.0 * r[1] + 0.25 * r[2] +
        std::normal_distribution<double>(0.0, 0.3)(gen);
  }
  const RegressionFit fit = fit_glm(Design(rows), x);
  REQUIRE(fit.df() == n - m - 1);
  for (int k = 0; k <= m; ++k) {
    const IntervalReport ci =
        confidence_interval(fit, k, 0.05, DivisorMode::exact);
    CHECK(ci.half_width > 0.0);
    CHECK(ci.scale ==
          doctest::Approx(std::sqrt(fit.sigma_hat_sq_unbiased *
                                    fit.xtx_inv_diag[static_cast<std::size_t>(
                                        k)]))
              .epsilon(1e-14));
    const TestReport t =
        hypothesis_test(fit, k, ci.center + 0.5 * ci.half_width, 0.05,
                        DivisorMode::exact);
    CHECK(t.rejected == !ci.contains(ci.center + 0.5 * ci.half_width));
  }
}

TEST_CASE("argument guards") {
  const std::vector<double> a = {0.0, 1.0, 2.0};
  const std::vector<double> x = {1.0, 1.0, 3.0};
  const RegressionFit fit = fit_simple(a, x);
  CHECK_THROWS_AS(confidence_interval(fit, 2, 0.05, DivisorMode::exact),
                  DomainError);
  CHECK_THROWS_AS(confidence_interval(fit, -1, 0.05, DivisorMode::exact),
                  DomainError);
  CHECK_THROWS_AS(confidence_interval(fit, 1, 0.0, DivisorMode::exact),
                  DomainError);
  CHECK_THROWS_AS(confidence_interval(fit, 1, 1.0, DivisorMode::exact),
                  DomainError);
  CHECK_THROWS_AS(hypothesis_test(fit, 1, std::numeric_limits<double>::infinity(),
                                  0.05, DivisorMode::exact),
                  DomainError);
  // A hand-assembled fit with no residual degrees of freedom is refused.
  RegressionFit flat;
  flat.beta_hat = {0.0, 1.0};
  flat.xtx_inv_diag = {1.0, 1.0};
  flat.n = 3;
  flat.m = 2;  // df = 0
  CHECK_THROWS_AS(SemiDistance(flat, 1, DivisorMode::exact),
                  InsufficientDataError);
  CHECK(to_string(DivisorMode::exact) == "exact");
  CHECK(to_string(DivisorMode::paper_verbatim) == "paper-verbatim");
}
