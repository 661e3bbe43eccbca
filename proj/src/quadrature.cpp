#include "tnls/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "tnls/error.hpp"

namespace tnls {

namespace {

// Orthonormal Hermite functions h_0..h_n at t (weight included).
void hermite_functions(int n, double t, std::vector<double>& h)
{
  h.assign(static_cast<std::size_t>(n) + 1, 0.0);
  h[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * t * t);
  if (n >= 1) {
    h[1] = std::sqrt(2.0) * t * h[0];
  }
  for (int k = 1; k < n; ++k) {
    h[k + 1] = std::sqrt(2.0 / (k + 1)) * t * h[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * h[k - 1];
  }
}

}  // namespace

const char* to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::BasisConstruction: return "basis-construction";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::UnsupportedRegime: return "unsupported-regime";
    case ErrorKind::Smallness: return "smallness";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

GaussHermite gauss_hermite(int order)
{
  if (order < 1 || order > 150) {
    throw Error(ErrorKind::Configuration, "Gauss-Hermite order must lie in [1, 150]");
  }
  // Newton iteration on the orthonormal Hermite polynomial, roots from the
  // largest down with the usual asymptotic initial guesses.
  const int n = order;
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
        break;
      }
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  GaussHermite rule;
  rule.nodes.assign(x.rbegin(), x.rend());
  rule.weights.assign(w.rbegin(), w.rend());
  return rule;
}

FlatRule compensated_hermite_rule(int order)
{
  const GaussHermite gh = gauss_hermite(order);
  FlatRule rule;
  rule.nodes.resize(gh.nodes.size());
  rule.weights.resize(gh.nodes.size());
  std::vector<double> h;
  for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
    const double t = gh.nodes[k];
    // w_k exp(t_k^2) = 1 / (N h_{N-1}(t_k)^2), evaluated without overflow.
    hermite_functions(order - 1, t, h);
    const double hl = h.back();
    rule.nodes[k] = std::numbers::sqrt2 * t;
    rule.weights[k] = std::numbers::sqrt2 / (order * hl * hl);
  }
  return rule;
}

std::vector<double> scaled_hermite_functions(int max_degree, double x)
{
  std::vector<double> h;
  hermite_functions(max_degree, x / std::numbers::sqrt2, h);
  const double scale = std::pow(2.0, -0.25);
  for (double& v : h) {
    v *= scale;
  }
  return h;
}

std::vector<double> scaled_hermite_derivatives(int max_degree, double x)
{
  // h_k'(t) = sqrt(k/2) h_{k-1} - sqrt((k+1)/2) h_{k+1};  d/dx = (1/sqrt2) d/dt.
  const std::vector<double> psi = scaled_hermite_functions(max_degree + 1, x);
  std::vector<double> d(static_cast<std::size_t>(max_degree) + 1);
  for (int k = 0; k <= max_degree; ++k) {
    const double lower = k > 0 ? std::sqrt(k / 2.0) * psi[k - 1] : 0.0;
    d[k] = (lower - std::sqrt((k + 1) / 2.0) * psi[k + 1]) / std::numbers::sqrt2;
  }
  return d;
}

}  // namespace tnls
