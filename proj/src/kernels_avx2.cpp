// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after the runtime CPU check in
// kernels.cpp has passed.

#include <immintrin.h>

#include <cmath>
#include <span>

namespace mtreg::kernels::avx2 {

namespace {

// Four independent Neumaier accumulators, one per lane. The lanes are
// combined in scalar at the end, so a reduction costs one pass and stays
// within a few ulps of the sequential reference.
struct Acc4 {
  __m256d s = _mm256_setzero_pd();
  __m256d c = _mm256_setzero_pd();

  inline void add(__m256d x) {
    __m256d t = _mm256_add_pd(s, x);
    __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d abs_s = _mm256_and_pd(s, abs_mask);
    __m256d abs_x = _mm256_and_pd(x, abs_mask);
    __m256d ge = _mm256_cmp_pd(abs_s, abs_x, _CMP_GE_OQ);
    // if |s| >= |x|: (s - t) + x  else  (x - t) + s
    __m256d big = _mm256_blendv_pd(x, s, ge);
    __m256d small = _mm256_blendv_pd(s, x, ge);
    c = _mm256_add_pd(c, _mm256_add_pd(_mm256_sub_pd(big, t), small));
    s = t;
  }

  inline double value() const {
    alignas(32) double sv[4];
    alignas(32) double cv[4];
    _mm256_store_pd(sv, s);
    _mm256_store_pd(cv, c);
    double total = 0.0, comp = 0.0;
    for (int i = 0; i < 4; ++i) {
      double x = sv[i] + cv[i];
      double t = total + x;
      if (std::fabs(total) >= std::fabs(x))
        comp += (total - t) + x;
      else
        comp += (x - t) + total;
      total = t;
    }
    return total + comp;
  }
};

struct TailAcc {
  double s = 0.0;
  double c = 0.0;
  inline void add(double x) {
    double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
};

inline double finish(const Acc4& vec, const TailAcc& tail) {
  return vec.value() + (tail.s + tail.c);
}

}  // namespace

double sum(std::span<const double> v) {
  Acc4 acc;
  TailAcc tail;
  std::size_t i = 0;
  for (; i + 4 <= v.size(); i += 4) acc.add(_mm256_loadu_pd(v.data() + i));
  for (; i < v.size(); ++i) tail.add(v[i]);
  return finish(acc, tail);
}

double dot(std::span<const double> a, std::span<const double> b) {
  Acc4 acc;
  TailAcc tail;
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) {
    __m256d x = _mm256_loadu_pd(a.data() + i);
    __m256d y = _mm256_loadu_pd(b.data() + i);
    acc.add(_mm256_mul_pd(x, y));
  }
  for (; i < a.size(); ++i) tail.add(a[i] * b[i]);
  return finish(acc, tail);
}

double sum_sq_dev(std::span<const double> v, double c) {
  Acc4 acc;
  TailAcc tail;
  __m256d cc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= v.size(); i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v.data() + i), cc);
    acc.add(_mm256_mul_pd(d, d));
  }
  for (; i < v.size(); ++i) {
    double d = v[i] - c;
    tail.add(d * d);
  }
  return finish(acc, tail);
}

double centered_dot(std::span<const double> a, double ca,
                    std::span<const double> b, double cb) {
  Acc4 acc;
  TailAcc tail;
  __m256d va = _mm256_set1_pd(ca);
  __m256d vb = _mm256_set1_pd(cb);
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) {
    __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), va);
    __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b.data() + i), vb);
    acc.add(_mm256_mul_pd(da, db));
  }
  for (; i < a.size(); ++i) tail.add((a[i] - ca) * (b[i] - cb));
  return finish(acc, tail);
}

double residual_linear(std::span<const double> x, std::span<const double> a,
                       double b0, double b1, std::span<double> r) {
  Acc4 acc;
  TailAcc tail;
  __m256d v0 = _mm256_set1_pd(b0);
  __m256d v1 = _mm256_set1_pd(b1);
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    // mul + add (not fmadd) so each residual matches the scalar backend
    // bitwise; only the reduction below reassociates.
    __m256d pred =
        _mm256_add_pd(v0, _mm256_mul_pd(v1, _mm256_loadu_pd(a.data() + i)));
    __m256d ri = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), pred);
    _mm256_storeu_pd(r.data() + i, ri);
    acc.add(_mm256_mul_pd(ri, ri));
  }
  for (; i < x.size(); ++i) {
    double ri = x[i] - (b0 + b1 * a[i]);
    r[i] = ri;
    tail.add(ri * ri);
  }
  return finish(acc, tail);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    __m256d yi = _mm256_loadu_pd(y.data() + i);
    // mul + add keeps the update bitwise equal to the scalar backend.
    yi = _mm256_add_pd(yi, _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i)));
    _mm256_storeu_pd(y.data() + i, yi);
  }
  for (; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace mtreg::kernels::avx2
