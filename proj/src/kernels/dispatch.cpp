#include "tnls/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace tnls::kernels {

namespace {

Isa detect()
{
  if (const char* env = std::getenv("TNLS_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar") {
      return Isa::Scalar;
    }
    if (v == "avx2" && avx2::supported()) {
      return Isa::Avx2;
    }
  }
  return avx2::supported() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& current()
{
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

bool use_avx2() { return current().load(std::memory_order_relaxed) == static_cast<int>(Isa::Avx2); }

}  // namespace

Isa active_isa() { return static_cast<Isa>(current().load()); }

bool isa_available(Isa isa) { return isa == Isa::Scalar || avx2::supported(); }

void force_isa(Isa isa)
{
  if (isa_available(isa)) {
    current().store(static_cast<int>(isa));
  }
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y)
{
  use_avx2() ? avx2::caxpy(alpha, x, y) : scalar::caxpy(alpha, x, y);
}

void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out)
{
  use_avx2() ? avx2::cmul(a, b, out) : scalar::cmul(a, b, out);
}

void rscale(std::span<const double> r, std::span<const cplx> u, std::span<cplx> out)
{
  use_avx2() ? avx2::rscale(r, u, out) : scalar::rscale(r, u, out);
}

void abs2(std::span<const cplx> u, std::span<double> out)
{
  use_avx2() ? avx2::abs2(u, out) : scalar::abs2(u, out);
}

double wsum(std::span<const double> w, std::span<const double> x)
{
  return use_avx2() ? avx2::wsum(w, x) : scalar::wsum(w, x);
}

}  // namespace tnls::kernels
