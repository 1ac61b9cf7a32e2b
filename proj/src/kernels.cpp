#include "mtreg/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "mtreg/errors.hpp"

namespace mtreg::kernels {

namespace scalar {

// Neumaier variant of Kahan summation: tracks a running compensation that is
// added back once at the end.
struct Acc {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::fabs(s) >= std::fabs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  double value() const { return s + c; }
};

double sum(std::span<const double> v) {
  Acc acc;
  for (double x : v) acc.add(x);
  return acc.value();
}

double dot(std::span<const double> a, std::span<const double> b) {
  Acc acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

double sum_sq_dev(std::span<const double> v, double c) {
  Acc acc;
  for (double x : v) {
    double d = x - c;
    acc.add(d * d);
  }
  return acc.value();
}

double centered_dot(std::span<const double> a, double ca,
                    std::span<const double> b, double cb) {
  Acc acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add((a[i] - ca) * (b[i] - cb));
  return acc.value();
}

double residual_linear(std::span<const double> x, std::span<const double> a,
                       double b0, double b1, std::span<double> r) {
  Acc acc;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double ri = x[i] - (b0 + b1 * a[i]);
    r[i] = ri;
    acc.add(ri * ri);
  }
  return acc.value();
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace scalar

#if MTREG_HAVE_AVX2_TU
namespace avx2 {
double sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double sum_sq_dev(std::span<const double> v, double c);
double centered_dot(std::span<const double> a, double ca,
                    std::span<const double> b, double cb);
double residual_linear(std::span<const double> x, std::span<const double> a,
                       double b0, double b1, std::span<double> r);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if MTREG_HAVE_AVX2_TU
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

// Runs during static init, so it must not throw: an unsatisfiable
// MTREG_KERNELS falls back to detection.
Backend pick_initial_backend() {
  const char* env = std::getenv("MTREG_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::avx2;
    // anything else (including "auto") falls through to detection
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend> g_backend{pick_initial_backend()};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
  }
  return false;
}

void force_backend(Backend b) {
  if (!backend_available(b))
    throw DomainError(std::string("kernel backend unavailable: ") +
                      std::string(backend_name(b)));
  g_backend.store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "?";
}

#if MTREG_HAVE_AVX2_TU
#define MTREG_DISPATCH(fn, ...)                 \
  (active_backend() == Backend::avx2 ? avx2::fn(__VA_ARGS__) \
                                     : scalar::fn(__VA_ARGS__))
#else
#define MTREG_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double sum(std::span<const double> v) { return MTREG_DISPATCH(sum, v); }

double dot(std::span<const double> a, std::span<const double> b) {
  return MTREG_DISPATCH(dot, a, b);
}

double sum_sq_dev(std::span<const double> v, double c) {
  return MTREG_DISPATCH(sum_sq_dev, v, c);
}

double centered_dot(std::span<const double> a, double ca,
                    std::span<const double> b, double cb) {
  return MTREG_DISPATCH(centered_dot, a, ca, b, cb);
}

double residual_linear(std::span<const double> x, std::span<const double> a,
                       double b0, double b1, std::span<double> r) {
  return MTREG_DISPATCH(residual_linear, x, a, b0, b1, r);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  MTREG_DISPATCH(axpy, alpha, x, y);
}

#undef MTREG_DISPATCH

}  // namespace mtreg::kernels
