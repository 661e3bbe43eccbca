#include "tnls/kernels.hpp"

#include <cstddef>

namespace tnls::kernels::scalar {

// Complex values are handled through their real/imaginary parts explicitly so
// the operation order matches the vector code exactly.

void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y)
{
  const double ar = alpha.real();
  const double ai = alpha.imag();
  const double* xs = reinterpret_cast<const double*>(x.data());
  double* ys = reinterpret_cast<double*>(y.data());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xr = xs[2 * i];
    const double xi = xs[2 * i + 1];
    const double tr = xr * ar - xi * ai;
    const double ti = xi * ar + xr * ai;
    ys[2 * i] = ys[2 * i] + tr;
    ys[2 * i + 1] = ys[2 * i + 1] + ti;
  }
}

void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out)
{
  const double* as = reinterpret_cast<const double*>(a.data());
  const double* bs = reinterpret_cast<const double*>(b.data());
  double* os = reinterpret_cast<double*>(out.data());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = as[2 * i];
    const double ai = as[2 * i + 1];
    const double br = bs[2 * i];
    const double bi = bs[2 * i + 1];
    os[2 * i] = ar * br - ai * bi;
    os[2 * i + 1] = ai * br + ar * bi;
  }
}

void rscale(std::span<const double> r, std::span<const cplx> u, std::span<cplx> out)
{
  const double* us = reinterpret_cast<const double*>(u.data());
  double* os = reinterpret_cast<double*>(out.data());
  for (std::size_t i = 0; i < u.size(); ++i) {
    os[2 * i] = r[i] * us[2 * i];
    os[2 * i + 1] = r[i] * us[2 * i + 1];
  }
}

void abs2(std::span<const cplx> u, std::span<double> out)
{
  const double* us = reinterpret_cast<const double*>(u.data());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double re = us[2 * i];
    const double im = us[2 * i + 1];
    out[i] = re * re + im * im;
  }
}

double wsum(std::span<const double> w, std::span<const double> x)
{
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    s[i % 4] = s[i % 4] + w[i] * x[i];
  }
  return (s[0] + s[1]) + (s[2] + s[3]);
}

}  // namespace tnls::kernels::scalar
