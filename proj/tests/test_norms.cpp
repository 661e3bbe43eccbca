#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tnls/error.hpp"
#include "tnls/norms.hpp"

using namespace tnls;

TEST_CASE("rational exponents")
{
  CHECK(Rational::parse("8/3") == Rational(8, 3));
  CHECK(Rational::parse("16/6") == Rational(8, 3));
  CHECK(Rational::parse("inf").is_infinite());
  CHECK(Rational(4).reciprocal() == Rational(1, 4));
  CHECK(Rational::infinity().reciprocal() == Rational(0));
  CHECK(Rational(0).reciprocal().is_infinite());
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(8, 3).str() == "8/3");
  CHECK(Rational(2) < Rational(8, 3));
  CHECK(Rational(8, 3) < Rational::infinity());
  CHECK_THROWS_AS(Rational::parse("x"), Error);
  CHECK_THROWS_AS(Rational::parse("1/0"), Error);
}

TEST_CASE("rational arithmetic agrees with doubles (property)")
{
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const Rational a(static_cast<std::int64_t>(rng() % 41) - 20, 1 + static_cast<std::int64_t>(rng() % 12));
    const Rational b(static_cast<std::int64_t>(rng() % 41) - 20, 1 + static_cast<std::int64_t>(rng() % 12));
    CHECK((a + b).value() == doctest::Approx(a.value() + b.value()));
    CHECK((a - b).value() == doctest::Approx(a.value() - b.value()));
    CHECK((a * b).value() == doctest::Approx(a.value() * b.value()));
    CHECK(((a < b) == (a.value() < b.value())));
  }
}

TEST_CASE("admissible pairs and the distinguished pair")
{
  const AdmissiblePair cp = canonical_pair(2);
  CHECK(cp.q == Rational(4));
  CHECK(cp.p == Rational(8, 3));
  CHECK(admissible(cp.q, cp.p, 2));
  CHECK(admissible(Rational::infinity(), Rational(2), 2));
  CHECK(admissible(Rational(2), Rational(4), 2));
  CHECK_FALSE(admissible(Rational(2), Rational(3), 2));
  CHECK_FALSE(admissible(Rational(3, 2), Rational::infinity(), 2));
  CHECK(admissible(Rational(4), Rational(4), 1));
  CHECK_FALSE(admissible(Rational(4), Rational::infinity(), 1));
  CHECK(conjugate(Rational(4)) == Rational(4, 3));
  CHECK(conjugate(Rational(8, 3)) == Rational(8, 5));
  CHECK(conjugate(Rational(1)).is_infinite());
  CHECK_THROWS_AS(canonical_pair(1), Error);
}

TEST_CASE("Lebesgue norms of the ground state match the Gaussian integral")
{
  // Phi_00 = exp(-|z|^2/4) / sqrt(2 pi) per plane; ||.||_p^p = (2 pi)^{-p/2} 4 pi / p.
  // The rule is exact for p = 2 only; other p converge with the grid.
  const double pi = std::acos(-1.0);
  auto exact = [&](double p, int n) { return std::pow(std::pow(std::pow(2 * pi, -p / 2) * 4 * pi / p, 1 / p), n); };
  for (int n : {1, 2}) {
    const BasisTable& b = testing::shared_basis(n, 3);
    const GridField g = synthesize(b, SpectralField::unit(b, 0));
    CHECK(lp_norm(b, g, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : {8.0 / 3.0, 4.0, 6.0}) {
      CHECK(lp_norm(b, g, p) == doctest::Approx(exact(p, n)).epsilon(2e-2));
    }
    double mx = 0;
    for (const cplx& v : g.values) {
      mx = std::max(mx, std::abs(v));
    }
    CHECK(lp_norm(b, g, HUGE_VAL) == mx);
  }
  double prev = HUGE_VAL;
  for (int K : {1, 2, 4}) {
    const BasisTable& b = testing::shared_basis(1, K);
    const double err = std::abs(lp_norm(b, synthesize(b, SpectralField::unit(b, 0)), 4.0) - exact(4.0, 1));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("Sobolev norm of the ground state")
{
  // Z Phi_00 = 0 and Zbar Phi_00 = sqrt 2 Phi_01 in each plane.
  const BasisTable& b = testing::shared_basis(2, 2);
  const SobolevNorm s = sobolev_norm(b, SpectralField::unit(b, 0), 2.0);
  CHECK(s.value == doctest::Approx(1 + 2 * std::sqrt(2.0)).epsilon(1e-10));
  REQUIRE(s.components.size() == 5);
  CHECK(s.components[1] < 1e-12);
  CHECK(s.components[2] == doctest::Approx(std::sqrt(2.0)));
  CHECK_FALSE(s.overflow);
  const SobolevNorm g = sobolev_norm(b, SpectralField::unit(b, 0), 3.0, LadderRoute::Grid);
  const SobolevNorm sp = sobolev_norm(b, SpectralField::unit(b, 0), 3.0);
  CHECK(g.value == doctest::Approx(sp.value).epsilon(1e-8));
}

TEST_CASE("top-shell mass flags the spectral Sobolev norm")
{
  const BasisTable& b = testing::shared_basis(1, 2);
  const int mu[1] = {0}, nu[1] = {2};
  CHECK(sobolev_norm(b, SpectralField::unit(b, b.index(mu, nu)), 2.0).overflow);
}

TEST_CASE("time quadrature is exact for cubics and handles even sample counts")
{
  // q = 1 on nonnegative samples is a plain integral.
  for (int samples : {5, 6, 9, 12}) {
    const double T = 1.3;
    const double dt = T / (samples - 1);
    std::vector<double> v;
    for (int i = 0; i < samples; ++i) {
      const double t = i * dt;
      v.push_back(1 + t + t * t * t);
    }
    const double exact = T + T * T / 2 + std::pow(T, 4) / 4;
    const double tol = samples % 2 ? 1e-13 : 5e-3;
    CHECK(time_norm(v, dt, 1.0) == doctest::Approx(exact).epsilon(tol));
  }
  const std::vector<double> v{1.0, 3.0, 2.0};
  CHECK(time_norm(v, 0.1, HUGE_VAL) == 3.0);
}

TEST_CASE("charge and energy of simple fields")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  SpectralField f = SpectralField::unit(b, 0, cplx(0.6, 0.8));
  CHECK(charge(f) == doctest::Approx(1.0));
  CHECK(kinetic_energy(b, f) == doctest::Approx(1.0));  // eigenvalue n = 2, times 1/2
  CHECK(kinetic_energy_ladder(b, f) == doctest::Approx(1.0).epsilon(1e-8));
  NonlinearitySpec s;
  s.lambda = 0.0;
  CHECK(energy(b, f, s) == doctest::Approx(1.0));
}

TEST_CASE("kinetic energy by ladders equals the spectral form below the cutoff (property)")
{
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const BasisTable& b = testing::shared_basis(1 + trial % 2, 3);
    const SpectralField c = testing::random_coeffs(b, rng, true);
    CHECK(kinetic_energy_ladder(b, c) == doctest::Approx(kinetic_energy(b, c)).epsilon(1e-8));
  }
}
