#include "kernels_impl.hpp"

#if defined(MINERVA_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#define MINERVA_AVX2 __attribute__((target("avx2")))

namespace minerva::kernels::avx2 {

namespace {
MINERVA_AVX2 inline double combine_lanes(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}
}  // namespace

MINERVA_AVX2 double reduce_max(const double* x, std::size_t n) {
  std::size_t i = 0;
  __m256d m = _mm256_set1_pd(-__builtin_inf());
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(_mm256_loadu_pd(x + i), m);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double r = lane[0];
  for (int k = 1; k < 4; ++k) r = lane[k] > r ? lane[k] : r;
  for (; i < n; ++i) r = x[i] > r ? x[i] : r;
  return r;
}

MINERVA_AVX2 double reduce_sum(const double* x, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = combine_lanes(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

MINERVA_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double s = combine_lanes(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

MINERVA_AVX2 void scale(double* x, std::size_t n, double a) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (; i < n; ++i) x[i] *= a;
}

MINERVA_AVX2 void axpy(double* y, const double* x, std::size_t n, double a) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

MINERVA_AVX2 void blend(double* t, const double* x, std::size_t n, double a) {
  const double b = 1.0 - a;
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d lhs = _mm256_mul_pd(va, _mm256_loadu_pd(t + i));
    const __m256d rhs = _mm256_mul_pd(vb, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(t + i, _mm256_add_pd(lhs, rhs));
  }
  for (; i < n; ++i) t[i] = a * t[i] + b * x[i];
}

MINERVA_AVX2 void shift_scale(double* out, const double* in, std::size_t n, double shift,
                              double factor) {
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vf = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(in + i), vs);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(d, vf));
  }
  for (; i < n; ++i) out[i] = (in[i] - shift) * factor;
}

}  // namespace minerva::kernels::avx2

#endif
