#include "tnls/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tnls/error.hpp"
#include "tnls/kernels.hpp"

namespace tnls {

Rational::Rational(std::int64_t num, std::int64_t den)
{
  if (den == 0) {
    throw Error(ErrorKind::Usage, "rational with zero denominator (use Rational::infinity)");
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::infinity()
{
  Rational r;
  r.num_ = 1;
  r.den_ = 0;
  return r;
}

Rational Rational::parse(const std::string& text)
{
  if (text == "inf" || text == "infinity") {
    return infinity();
  }
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const long long v = std::stoll(text, &used);
      if (used != text.size()) {
        throw std::invalid_argument(text);
      }
      return Rational(v);
    }
    const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
    std::size_t ua = 0, ub = 0;
    const long long n = std::stoll(a, &ua);
    const long long d = std::stoll(b, &ub);
    if (ua != a.size() || ub != b.size()) {
      throw std::invalid_argument(text);
    }
    return Rational(n, d);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Usage, "not an exact exponent: '" + text + "'");
  }
}

double Rational::value() const
{
  return is_infinite() ? HUGE_VAL : static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::str() const
{
  if (is_infinite()) {
    return "inf";
  }
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::reciprocal() const
{
  if (is_infinite()) {
    return Rational(0);
  }
  if (num_ == 0) {
    return infinity();
  }
  return Rational(den_, num_);
}

Rational operator+(const Rational& a, const Rational& b)
{
  if (a.is_infinite() || b.is_infinite()) {
    return Rational::infinity();
  }
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator-(const Rational& a, const Rational& b)
{
  if (a.is_infinite() || b.is_infinite()) {
    throw Error(ErrorKind::Usage, "rational subtraction with infinity");
  }
  return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator*(const Rational& a, const Rational& b)
{
  if (a.is_infinite() || b.is_infinite()) {
    return Rational::infinity();
  }
  return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b)
{
  if (a.is_infinite() || b.is_infinite()) {
    return static_cast<int>(a.is_infinite()) <=> static_cast<int>(b.is_infinite());
  }
  return a.num_ * b.den_ <=> b.num_ * a.den_;
}

bool admissible(const Rational& q, const Rational& p, int n)
{
  if (n < 1 || q < Rational(2) || p < Rational(2)) {
    return false;
  }
  if (n >= 2 && Rational(2 * n, n - 1) < p) {
    return false;
  }
  const Rational half(1, 2);
  return q.reciprocal() == Rational(n) * (half - p.reciprocal());
}

AdmissiblePair canonical_pair(int n)
{
  if (n < 2) {
    throw Error(ErrorKind::UnsupportedRegime, "the distinguished pair (gamma, rho) needs n >= 2");
  }
  return {Rational(2 * n, n - 1), Rational(2 * n * n, n * n - n + 1)};
}

Rational conjugate(const Rational& p)
{
  if (p < Rational(1)) {
    throw Error(ErrorKind::Usage, "conjugate exponent needs p >= 1");
  }
  return (Rational(1) - p.reciprocal()).reciprocal();
}

double lp_norm(const BasisTable& b, const GridField& g, double p)
{
  require_basis(b, g.basis_id, "grid field");
  if (!(p >= 1.0)) {
    throw Error(ErrorKind::Usage, "lp_norm needs p >= 1");
  }
  std::vector<double> mod(g.values.size());
  kernels::abs2(g.values, mod);
  if (std::isinf(p)) {
    double mx = 0.0;
    for (double v : mod) {
      mx = std::max(mx, v);
    }
    return std::sqrt(mx);
  }
  if (p == 2.0) {
    return std::sqrt(kernels::wsum(b.weights(), mod));
  }
  // Scale by the maximum so |g|^p cannot overflow.
  double mx = 0.0;
  for (double v : mod) {
    mx = std::max(mx, v);
  }
  if (mx == 0.0) {
    return 0.0;
  }
  const double scale = std::sqrt(mx);
  for (double& v : mod) {
    v = std::pow(std::sqrt(v) / scale, p);
  }
  return scale * std::pow(kernels::wsum(b.weights(), mod), 1.0 / p);
}

SobolevNorm sobolev_norm(const BasisTable& b, const SpectralField& c, double p, LadderRoute route)
{
  require_basis(b, c.basis_id, "spectral field");
  SobolevNorm out;
  out.components.push_back(lp_norm(b, synthesize(b, c), p));
  for (int j = 0; j < b.n(); ++j) {
    for (bool bar : {false, true}) {
      double v;
      if (route == LadderRoute::Spectral) {
        const SpectralField s = apply_ladder(b, c, Ladder{j, bar});
        out.overflow = out.overflow || s.overflow;
        v = lp_norm(b, synthesize(b, s), p);
      } else {
        v = lp_norm(b, grid_apply_ladder(b, c, Ladder{j, bar}), p);
      }
      out.components.push_back(v);
    }
  }
  if (route == LadderRoute::Grid) {
    out.overflow = has_top_shell_mass(b, c, 1e-8);
  }
  out.value = 0.0;
  for (double v : out.components) {
    out.value += v;
  }
  return out;
}

double time_norm(std::span<const double> samples, double dt, double q)
{
  const std::size_t N = samples.size();
  if (N < 3) {
    throw Error(ErrorKind::Usage, "time norm needs at least 3 samples");
  }
  if (std::isinf(q)) {
    return *std::max_element(samples.begin(), samples.end());
  }
  std::vector<double> f(N);
  for (std::size_t k = 0; k < N; ++k) {
    f[k] = std::pow(samples[k], q);
  }
  const std::size_t simpson_end = (N % 2 == 1) ? N - 1 : N - 2;
  double s = 0.0;
  for (std::size_t k = 0; k + 2 <= simpson_end; k += 2) {
    s += dt / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
  }
  if (N % 2 == 0) {
    s += 0.5 * dt * (f[N - 2] + f[N - 1]);
  }
  return std::pow(std::max(s, 0.0), 1.0 / q);
}

namespace {

std::string rule_name(std::size_t count)
{
  return count % 2 == 1 ? "composite-simpson" : "composite-simpson+trapezoid";
}

}  // namespace

MixedNormReport mixed_norm(const BasisTable& b, const SolutionTrace& trace, const Rational& q, const Rational& p,
                           SpaceNorm space)
{
  if (trace.size() < 3) {
    throw Error(ErrorKind::Usage, "mixed norm needs at least 3 samples");
  }
  MixedNormReport r;
  r.q = q;
  r.p = p;
  r.a = trace.times.front();
  r.b = trace.times.back();
  r.samples.reserve(trace.size());
  for (const SpectralField& f : trace.fields) {
    if (space == SpaceNorm::Sobolev) {
      const SobolevNorm s = sobolev_norm(b, f, p.value());
      r.overflow = r.overflow || s.overflow;
      r.samples.push_back(s.value);
    } else {
      r.samples.push_back(lp_norm(b, synthesize(b, f), p.value()));
    }
  }
  r.value = time_norm(r.samples, std::abs(trace.dt()), q.value());
  r.rule = q.is_infinite() ? "max" : rule_name(trace.size());
  return r;
}

MixedNormReport mixed_norm_grid(const BasisTable& b, std::span<const GridField> fields, double dt, const Rational& q,
                                const Rational& p)
{
  if (fields.size() < 3) {
    throw Error(ErrorKind::Usage, "mixed norm needs at least 3 samples");
  }
  MixedNormReport r;
  r.q = q;
  r.p = p;
  r.b = dt * static_cast<double>(fields.size() - 1);
  for (const GridField& g : fields) {
    r.samples.push_back(lp_norm(b, g, p.value()));
  }
  r.value = time_norm(r.samples, std::abs(dt), q.value());
  r.rule = q.is_infinite() ? "max" : rule_name(fields.size());
  return r;
}

nlohmann::json to_json(const MixedNormReport& r)
{
  return nlohmann::json{{"q", r.q.str()},
                        {"p", r.p.str()},
                        {"interval", {r.a, r.b}},
                        {"samples", r.samples},
                        {"value", r.value},
                        {"rule", r.rule}};
}

double charge(const SpectralField& c)
{
  double s = 0.0;
  for (const cplx& v : c.coeffs) {
    s += std::norm(v);
  }
  return std::sqrt(s);
}

double kinetic_energy(const BasisTable& b, const SpectralField& c)
{
  require_basis(b, c.basis_id, "spectral field");
  double s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    s += b.eigenvalues()[k] * std::norm(c.coeffs[k]);
  }
  return 0.5 * s;
}

double kinetic_energy_ladder(const BasisTable& b, const SpectralField& c)
{
  double s = 0.0;
  for (int j = 0; j < b.n(); ++j) {
    for (bool bar : {false, true}) {
      const double v = lp_norm(b, grid_apply_ladder(b, c, Ladder{j, bar}), 2.0);
      s += v * v;
    }
  }
  return 0.25 * s;
}

double energy(const BasisTable& b, const SpectralField& c, const NonlinearitySpec& spec)
{
  return kinetic_energy(b, c) + potential_energy(b, synthesize(b, c), spec);
}

}  // namespace tnls
