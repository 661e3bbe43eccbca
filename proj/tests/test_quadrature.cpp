#include <doctest.h>

#include <cmath>

#include "tnls/quadrature.hpp"

using namespace tnls;

namespace {

// Integral of t^(2k) exp(-t^2) over R: (2k-1)!! sqrt(pi) / 2^k.
double gaussian_moment(int k)
{
  double v = std::sqrt(std::acos(-1.0));
  for (int i = 1; i <= k; ++i) {
    v *= (2.0 * i - 1.0) / 2.0;
  }
  return v;
}

}  // namespace

TEST_CASE("Gauss-Hermite integrates monomials up to degree 2G-1 exactly")
{
  for (int G : {1, 2, 5, 8, 12}) {
    const GaussHermite q = gauss_hermite(G);
    REQUIRE(q.nodes.size() == static_cast<std::size_t>(G));
    for (int d = 0; d <= 2 * G - 1; ++d) {
      double s = 0, mag = 0;
      for (int i = 0; i < G; ++i) {
        s += q.weights[i] * std::pow(q.nodes[i], d);
        mag += std::abs(q.weights[i] * std::pow(q.nodes[i], d));
      }
      const double exact = d % 2 ? 0.0 : gaussian_moment(d / 2);
      CHECK(std::abs(s - exact) <= 1e-13 * mag);
    }
    for (int i = 1; i < G; ++i) {
      CHECK(q.nodes[i - 1] < q.nodes[i]);
    }
  }
}

TEST_CASE("scaled Hermite functions are orthonormal oscillator eigenfunctions")
{
  const int N = 6;
  const FlatRule r = compensated_hermite_rule(N + 2);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      double s = 0;
      for (std::size_t p = 0; p < r.nodes.size(); ++p) {
        const auto v = scaled_hermite_functions(N, r.nodes[p]);
        s += r.weights[p] * v[i] * v[j];
      }
      CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
    }
  }
  // -psi'' + x^2/4 psi = (i + 1/2) psi, second derivative by a 5-point stencil.
  const double h = 1e-3;
  for (double x : {-2.3, -0.4, 0.0, 0.7, 1.9}) {
    const auto c = scaled_hermite_functions(N, x);
    const auto m1 = scaled_hermite_functions(N, x - h), p1 = scaled_hermite_functions(N, x + h);
    const auto m2 = scaled_hermite_functions(N, x - 2 * h), p2 = scaled_hermite_functions(N, x + 2 * h);
    const auto d = scaled_hermite_derivatives(N, x);
    for (int i = 0; i <= N; ++i) {
      const double dd = (-p2[i] + 16 * p1[i] - 30 * c[i] + 16 * m1[i] - m2[i]) / (12 * h * h);
      CHECK(-dd + x * x / 4 * c[i] == doctest::Approx((i + 0.5) * c[i]).scale(1.0).epsilon(1e-5));
      const double d1 = (-p2[i] + 8 * p1[i] - 8 * m1[i] + m2[i]) / (12 * h);
      CHECK(d[i] == doctest::Approx(d1).scale(1.0).epsilon(1e-9));
    }
  }
}
