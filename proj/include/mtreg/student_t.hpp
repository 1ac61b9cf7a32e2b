#pragma once

namespace mtreg {

// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1],
// by the standard continued fraction (modified Lentz) with the symmetry
// switch at x = (a + 1) / (a + b + 2).
double ibeta_reg(double a, double b, double x);

// Student t distribution with df >= 1 degrees of freedom.
double t_pdf(double t, int df);
double t_cdf(double t, int df);

// Inverse CDF on p in (0, 1): bracketing bisection on the half tail
// min(p, 1 - p), which stays fully accurate in relative terms out to
// extreme quantiles. Satisfies |t_cdf(t_quantile(p, df), df) - p| < 1e-10,
// and inverts to within ~ulp(p)/pdf of the exact quantile.
double t_quantile(double p, int df);

// Upper alpha/2 point: the eta threshold used by the studentized interval
// and test. Equals t_quantile(1 - alpha / 2, df).
double t_upper_point(double alpha, int df);

}  // namespace mtreg
