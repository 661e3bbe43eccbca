#include "tnls/kernels.hpp"

#include <cstddef>

#if defined(__x86_64__) || defined(__i386__)
#define TNLS_HAVE_X86 1
#include <immintrin.h>
#else
#define TNLS_HAVE_X86 0
#endif

namespace tnls::kernels::avx2 {

#if TNLS_HAVE_X86

#define TNLS_AVX2 __attribute__((target("avx2")))

bool supported()
{
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
}

namespace {

// [ar, ai, ...] * [br, bi, ...] for two packed complex numbers.
TNLS_AVX2 inline __m256d mul2(__m256d a, __m256d b)
{
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  const __m256d t1 = _mm256_mul_pd(a, b_re);     // ar*br, ai*br
  const __m256d t2 = _mm256_mul_pd(a_sw, b_im);  // ai*bi, ar*bi
  return _mm256_addsub_pd(t1, t2);
}

}  // namespace

TNLS_AVX2 void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y)
{
  const double* xs = reinterpret_cast<const double*>(x.data());
  double* ys = reinterpret_cast<double*>(y.data());
  const std::size_t n = x.size();
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xs + 2 * i);
    const __m256d t1 = _mm256_mul_pd(xv, ar);                          // xr*ar, xi*ar
    const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(xv, 0x5), ai);  // xi*ai, xr*ai
    const __m256d t = _mm256_addsub_pd(t1, t2);
    _mm256_storeu_pd(ys + 2 * i, _mm256_add_pd(_mm256_loadu_pd(ys + 2 * i), t));
  }
  if (i < n) {
    scalar::caxpy(alpha, x.subspan(i), y.subspan(i));
  }
}

TNLS_AVX2 void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out)
{
  const double* as = reinterpret_cast<const double*>(a.data());
  const double* bs = reinterpret_cast<const double*>(b.data());
  double* os = reinterpret_cast<double*>(out.data());
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(os + 2 * i, mul2(_mm256_loadu_pd(as + 2 * i), _mm256_loadu_pd(bs + 2 * i)));
  }
  if (i < n) {
    scalar::cmul(a.subspan(i), b.subspan(i), out.subspan(i));
  }
}

TNLS_AVX2 void rscale(std::span<const double> r, std::span<const cplx> u, std::span<cplx> out)
{
  const double* us = reinterpret_cast<const double*>(u.data());
  double* os = reinterpret_cast<double*>(out.data());
  const std::size_t n = u.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // r0 r0 r1 r1
    const __m128d rr = _mm_loadu_pd(r.data() + i);
    const __m256d rv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(rr), 0x50);
    _mm256_storeu_pd(os + 2 * i, _mm256_mul_pd(rv, _mm256_loadu_pd(us + 2 * i)));
  }
  if (i < n) {
    scalar::rscale(r.subspan(i), u.subspan(i), out.subspan(i));
  }
}

TNLS_AVX2 void abs2(std::span<const cplx> u, std::span<double> out)
{
  const double* us = reinterpret_cast<const double*>(u.data());
  const std::size_t n = u.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(us + 2 * i);
    const __m256d b = _mm256_loadu_pd(us + 2 * i + 4);
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    _mm256_storeu_pd(out.data() + i, _mm256_permute4x64_pd(h, 0xD8));
  }
  if (i < n) {
    scalar::abs2(u.subspan(i), out.subspan(i));
  }
}

TNLS_AVX2 double wsum(std::span<const double> w, std::span<const double> x)
{
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w.data() + i), _mm256_loadu_pd(x.data() + i)));
  }
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  for (; i < n; ++i) {
    s[i % 4] = s[i % 4] + w[i] * x[i];
  }
  return (s[0] + s[1]) + (s[2] + s[3]);
}

#else

bool supported() { return false; }
void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) { scalar::caxpy(alpha, x, y); }
void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) { scalar::cmul(a, b, out); }
void rscale(std::span<const double> r, std::span<const cplx> u, std::span<cplx> out) { scalar::rscale(r, u, out); }
void abs2(std::span<const cplx> u, std::span<double> out) { scalar::abs2(u, out); }
double wsum(std::span<const double> w, std::span<const double> x) { return scalar::wsum(w, x); }

#endif

}  // namespace tnls::kernels::avx2
