#pragma once

#include <complex>
#include <span>

// Data-parallel inner loops shared by the transforms, the propagator, the
// nonlinearity and the norms.  Every kernel has a scalar reference version
// and an AVX2 version; the active one is chosen once per process.  Both
// versions perform the same IEEE operations in the same order, so their
// results are bit-identical (the build disables FMA contraction).

namespace tnls::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

/// y += alpha * x
void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
/// out = a * b, elementwise
void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
/// out = r * u, elementwise with real r
void rscale(std::span<const double> r, std::span<const cplx> u, std::span<cplx> out);
/// out = |u|^2
void abs2(std::span<const cplx> u, std::span<double> out);
/// sum of w[i] * x[i], accumulated in four interleaved partial sums
/// combined as (s0 + s1) + (s2 + s3).
double wsum(std::span<const double> w, std::span<const double> x);

Isa active_isa();
bool isa_available(Isa isa);
/// Overrides the runtime choice (tests, TNLS_SIMD=scalar|avx2).
void force_isa(Isa isa);
const char* isa_name(Isa isa);

namespace scalar {
void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
void rscale(std::span<const double> r, std::span<const cplx> u, std::span<cplx> out);
void abs2(std::span<const cplx> u, std::span<double> out);
double wsum(std::span<const double> w, std::span<const double> x);
}  // namespace scalar

namespace avx2 {
bool supported();
void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
void rscale(std::span<const double> r, std::span<const cplx> u, std::span<cplx> out);
void abs2(std::span<const cplx> u, std::span<double> out);
double wsum(std::span<const double> w, std::span<const double> x);
}  // namespace avx2

}  // namespace tnls::kernels
