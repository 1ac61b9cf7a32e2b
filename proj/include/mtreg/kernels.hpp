#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Vector kernels used by the statistics hot paths (sample moments, least
// squares, residuals, the Monte Carlo harness). Every kernel has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant. The backend
// is picked once at runtime from CPU features; MTREG_KERNELS=scalar|avx2|auto
// overrides the choice, and tests pin it with force_backend().
//
// Reductions use Neumaier-compensated accumulation in both backends (the
// AVX2 variants keep one compensation term per lane). Scalar and SIMD results
// may differ in the last few ulps; the equivalence suite bounds the gap.

namespace mtreg::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_available(Backend b);
void force_backend(Backend b);  // throws DomainError if unavailable
std::string_view backend_name(Backend b);

// sum of v[i]
double sum(std::span<const double> v);

// sum of a[i]*b[i]
double dot(std::span<const double> a, std::span<const double> b);

// sum of (v[i]-c)^2
double sum_sq_dev(std::span<const double> v, double c);

// sum of (a[i]-ca)*(b[i]-cb)
double centered_dot(std::span<const double> a, double ca,
                    std::span<const double> b, double cb);

// r[i] = x[i] - (b0 + b1*a[i]); returns sum of r[i]^2
double residual_linear(std::span<const double> x, std::span<const double> a,
                       double b0, double b1, std::span<double> r);

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace mtreg::kernels
