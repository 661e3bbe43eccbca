#include "tnls/nonlinearity.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "tnls/error.hpp"
#include "tnls/kernels.hpp"

namespace tnls {

namespace {

void require_nonnegative(double sigma)
{
  if (!(sigma >= 0.0)) {
    throw Error(ErrorKind::Usage, "psi: sigma must be nonnegative");
  }
}

struct Legendre32 {
  std::array<double, 32> x{}, w{};
  Legendre32()
  {
    constexpr int N = 32;
    for (int i = 0; i < N; ++i) {
      double t = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (t * p1 - p0) / (t * t - 1.0);
        const double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-16) {
          break;
        }
      }
      x[i] = t;
      w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

double integrate(const std::function<double(double)>& f, double a, double b)
{
  static const Legendre32 rule;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (int i = 0; i < 32; ++i) {
    s += rule.w[i] * f(mid + half * rule.x[i]);
  }
  return half * s;
}

}  // namespace

void NonlinearitySpec::validate() const
{
  if (m < 0) {
    throw Error(ErrorKind::Configuration, "nonlinearity.m must be >= 0");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::Configuration, "nonlinearity.alpha must be positive");
  }
  if (!std::isfinite(lambda)) {
    throw Error(ErrorKind::Configuration, "nonlinearity.lambda must be finite");
  }
  if (form == NonlinearityForm::Plugin && !plugin) {
    throw Error(ErrorKind::Configuration, "plugin nonlinearity without a psi function");
  }
}

NonlinearitySpec NonlinearitySpec::with_m(int level) const
{
  NonlinearitySpec s = *this;
  s.m = level;
  return s;
}

double critical_alpha(int n)
{
  if (n < 2) {
    throw Error(ErrorKind::UnsupportedRegime, "the critical exponent 2/(n-1) needs n >= 2");
  }
  return 2.0 / (n - 1);
}

double psi(double sigma, const NonlinearitySpec& spec, std::span<const double> point)
{
  require_nonnegative(sigma);
  if (spec.form == NonlinearityForm::Plugin) {
    return spec.plugin(point, sigma);
  }
  if (sigma == 0.0) {
    return 0.0;
  }
  return spec.lambda * std::pow(sigma, spec.alpha);
}

double psi_m(double sigma, const NonlinearitySpec& spec, std::span<const double> point)
{
  require_nonnegative(sigma);
  if (spec.m < 0) {
    throw Error(ErrorKind::Configuration, "nonlinearity.m must be >= 0");
  }
  const double m = spec.m;
  if (spec.m == 0 || sigma <= m) {
    return psi(sigma, spec, point);
  }
  if (spec.form == NonlinearityForm::Plugin) {
    const double pm = psi(m, spec, point);
    return m * m * (psi(sigma, spec, point) / (sigma * sigma) - pm / (sigma * sigma) + pm / (m * m));
  }
  const double a = spec.alpha;
  return spec.lambda * (m * m * std::pow(sigma, a - 2.0) - std::pow(m, a + 2.0) / (sigma * sigma) + std::pow(m, a));
}

double psi_m_derivative(double sigma, const NonlinearitySpec& spec, std::span<const double> point)
{
  require_nonnegative(sigma);
  if (spec.form == NonlinearityForm::Plugin) {
    const double h = 1e-6 * std::max(1.0, sigma);
    const double lo = std::max(0.0, sigma - h);
    return (psi_m(sigma + h, spec, point) - psi_m(lo, spec, point)) / (sigma + h - lo);
  }
  const double a = spec.alpha;
  const double m = spec.m;
  if (sigma == 0.0) {
    return a > 1.0 ? 0.0 : (a == 1.0 ? spec.lambda : HUGE_VAL);
  }
  if (spec.m == 0 || sigma <= m) {
    return spec.lambda * a * std::pow(sigma, a - 1.0);
  }
  return spec.lambda * (m * m * (a - 2.0) * std::pow(sigma, a - 3.0) + 2.0 * std::pow(m, a + 2.0) / (sigma * sigma * sigma));
}

double gtilde(double sigma, const NonlinearitySpec& spec, std::span<const double> point)
{
  require_nonnegative(sigma);
  if (sigma == 0.0) {
    return 0.0;
  }
  if (spec.form == NonlinearityForm::Plugin) {
    const auto integrand = [&](double s) { return s * psi_m(s, spec, point); };
    if (spec.m == 0 || sigma <= spec.m) {
      return integrate(integrand, 0.0, sigma);
    }
    return integrate(integrand, 0.0, spec.m) + integrate(integrand, spec.m, sigma);
  }
  const double a = spec.alpha;
  const double m = spec.m;
  if (spec.m == 0 || sigma <= m) {
    return spec.lambda * std::pow(sigma, a + 2.0) / (a + 2.0);
  }
  const double ma = std::pow(m, a);
  return spec.lambda * (ma * m * m / (a + 2.0) + m * m * (std::pow(sigma, a) - ma) / a -
                        ma * m * m * std::log(sigma / m) + ma * (sigma * sigma - m * m) / 2.0);
}

std::vector<double> psi_m_field(const BasisTable& b, const GridField& u, const NonlinearitySpec& spec)
{
  require_basis(b, u.basis_id, "grid field");
  std::vector<double> mod(u.values.size());
  kernels::abs2(u.values, mod);
  std::vector<double> out(mod.size());
  if (spec.form == NonlinearityForm::Plugin) {
    for (std::size_t p = 0; p < mod.size(); ++p) {
      const std::vector<double> pt = b.node(p);
      out[p] = psi_m(std::sqrt(mod[p]), spec, pt);
    }
    return out;
  }
  for (std::size_t p = 0; p < mod.size(); ++p) {
    out[p] = psi_m(std::sqrt(mod[p]), spec);
  }
  return out;
}

GridField eval_G_m(const BasisTable& b, const GridField& u, const NonlinearitySpec& spec)
{
  const std::vector<double> factor = psi_m_field(b, u, spec);
  GridField out{std::vector<cplx>(u.values.size()), u.basis_id};
  kernels::rscale(factor, u.values, out.values);
  return out;
}

double potential_energy(const BasisTable& b, const GridField& u, const NonlinearitySpec& spec)
{
  require_basis(b, u.basis_id, "grid field");
  std::vector<double> mod(u.values.size());
  kernels::abs2(u.values, mod);
  for (std::size_t p = 0; p < mod.size(); ++p) {
    if (spec.form == NonlinearityForm::Plugin) {
      const std::vector<double> pt = b.node(p);
      mod[p] = gtilde(std::sqrt(mod[p]), spec, pt);
    } else {
      mod[p] = gtilde(std::sqrt(mod[p]), spec);
    }
  }
  return kernels::wsum(b.weights(), mod);
}

}  // namespace tnls
