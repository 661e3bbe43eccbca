#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tnls/error.hpp"
#include "tnls/solver.hpp"
#include "tnls/verification.hpp"

using namespace tnls;
using testing::max_diff;

namespace {

SpectralField small_field(const BasisTable& b, double amp, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  SpectralField f = testing::random_coeffs(b, rng, true);
  const double c = charge(f);
  for (auto& v : f.coeffs) {
    v *= amp / c;
  }
  return f;
}

NonlinearitySpec cubic(double lambda, int m)
{
  NonlinearitySpec s;
  s.lambda = lambda;
  s.alpha = 2.0;
  s.m = m;
  return s;
}

SolverConfig config(double T, int steps, Scheme s)
{
  SolverConfig c;
  c.T = T;
  c.n_steps = steps;
  c.scheme = s;
  return c;
}

}  // namespace

TEST_CASE("lambda = 0 gives the exact free flow for both schemes")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  const SpectralField f = small_field(b, 1.0, 1);
  for (Scheme s : {Scheme::Picard, Scheme::SplitStep}) {
    const SolverConfig cfg = config(0.7, 20, s);
    const SolutionTrace u = solve(b, f, cubic(0.0, 0), cfg);
    REQUIRE(u.size() == 21);
    for (std::size_t k = 0; k < u.size(); ++k) {
      CHECK(max_diff(u.fields[k], propagate_free(b, f, u.times[k])) < 1e-13);
    }
  }
}

TEST_CASE("the Duhamel map returns the datum at t0 and the Picard limit is its fixed point")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  const SpectralField f = small_field(b, 0.5, 2);
  const SolverConfig cfg = config(0.5, 40, Scheme::Picard);
  const SolutionTrace u = picard_solve(b, f, cubic(1.0, 4), cfg);
  CHECK(u.fields[0].coeffs == f.coeffs);
  const SolutionTrace h = duhamel_apply(b, f, u, cubic(1.0, 4), cfg);
  CHECK(h.fields[0].coeffs == f.coeffs);
  CHECK(trace_distance(b, h, u) < 1e-9);
  CHECK(u.meta.iterations >= 1);
  for (double q : u.meta.contraction_factors) {
    CHECK(q < 1.0);
  }
}

TEST_CASE("Picard and split-step agree to second order in the step")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  const SpectralField f = small_field(b, 0.8, 3);
  std::vector<double> gaps;
  for (int steps : {20, 40, 80}) {
    const SolutionTrace p = solve(b, f, cubic(1.0, 2), config(0.4, steps, Scheme::Picard));
    const SolutionTrace s = solve(b, f, cubic(1.0, 2), config(0.4, steps, Scheme::SplitStep));
    gaps.push_back(trace_distance_linf_l2(p, s));
  }
  CHECK(gaps[0] / gaps[1] > 3.0);
  CHECK(gaps[1] / gaps[2] > 3.0);
}

TEST_CASE("split-step conserves charge and has a second-order energy error")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  const SpectralField f = small_field(b, 1.0, 4);
  const NonlinearitySpec spec = cubic(1.0, 3);
  std::vector<double> drift;
  for (int steps : {50, 100}) {
    SolutionTrace u = solve(b, f, spec, config(0.5, steps, Scheme::SplitStep));
    compute_diagnostics(b, u, spec);
    const ConservationReport r = conservation_report(u);
    CHECK(r.max_charge_drift < 1e-10);
    drift.push_back(r.max_energy_m_drift);
  }
  CHECK(std::log2(drift[0] / drift[1]) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("backward solve undoes the forward solve")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  const SpectralField f = small_field(b, 0.7, 5);
  const NonlinearitySpec spec = cubic(-1.0, 2);
  const SolutionTrace fwd = solve(b, f, spec, config(0.3, 30, Scheme::SplitStep));
  SolverConfig back = config(0.3, 30, Scheme::SplitStep);
  back.direction = -1;
  back.t0 = 0.3;
  const SolutionTrace bwd = solve(b, fwd.fields.back(), spec, back);
  CHECK(bwd.times.back() == doctest::Approx(0.0).scale(1.0));
  CHECK(max_diff(bwd.fields.back(), f) < 1e-9);
}

TEST_CASE("Picard failures carry the residual history")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  SolverConfig cfg = config(0.5, 20, Scheme::Picard);
  cfg.max_iter = 1;
  try {
    picard_solve(b, small_field(b, 0.8, 6), cubic(1.0, 4), cfg);
    FAIL("expected non-convergence");
  } catch (const SolveError& e) {
    CHECK(e.kind() == ErrorKind::NonConvergence);
    CHECK(e.residuals().size() == 1);
  }
  cfg.max_iter = 60;
  cfg.T = 3.0;
  cfg.n_steps = 60;
  try {
    picard_solve(b, small_field(b, 40.0, 6), cubic(-1.0, 0), cfg);
    FAIL("expected divergence");
  } catch (const SolveError& e) {
    CHECK(e.kind() == ErrorKind::Divergence);
    CHECK(e.residuals().size() >= 3);
  }
}

TEST_CASE("solver configuration is validated")
{
  const SolverConfig ok = config(0.5, 10, Scheme::Picard);
  CHECK_NOTHROW(ok.validate());
  SolverConfig c = ok;
  c.n_steps = 7;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ok;
  c.n_steps = 2;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ok;
  c.T = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ok;
  c.tol_fixed_point = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ok;
  c.delta = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("select_T returns the largest admissible candidate")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  const SpectralField f = small_field(b, 0.3, 7);
  const std::vector<double> cands{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  const double delta = free_flow_norm(b, f, 0.1, 64) * 1.01;
  const double T = select_T(b, f, delta, cands);
  CHECK(T == 0.1);
  CHECK_THROWS_AS(select_T(b, f, 1e-9, cands), Error);
  try {
    select_T(b, f, 1e-9, cands);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Smallness);
  }
}

TEST_CASE("2 delta bound holds for every truncation level once T is selected")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  const SpectralField f = small_field(b, 0.05, 8);
  const double delta = 0.05;
  std::vector<double> cands;
  for (int i = 0; i < 24; ++i) {
    cands.push_back(1e-3 * std::pow(std::acos(-1.0) / 1e-3, i / 23.0));
  }
  SolverConfig cfg = config(select_T(b, f, delta, cands), 40, Scheme::Picard);
  const LimitResult lr = limit_solution(b, f, cubic(1.0, 0), cfg, {1, 2, 4, 8});
  REQUIRE(lr.complete);
  CHECK(lr.table.size() == 3);
  const AdmissiblePair cp = canonical_pair(2);
  for (const SolutionTrace& u : lr.traces) {
    CHECK(mixed_norm(b, u, cp.q, cp.p).value <= 2.2 * delta);
  }
}

TEST_CASE("n = 1 uses the L^inf L^2 stopping norm")
{
  const BasisTable& b = testing::shared_basis(1, 3);
  const SpectralField f = small_field(b, 0.5, 9);
  const SolutionTrace u = solve(b, f, cubic(1.0, 0), config(0.5, 20, Scheme::SplitStep));
  const SolutionTrace v = free_flow(b, f, config(0.5, 20, Scheme::Picard));
  std::vector<GridField> gu, gv;
  double oracle = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    gu.push_back(synthesize(b, u.fields[k]));
    gv.push_back(synthesize(b, v.fields[k]));
    GridField d = gu.back();
    for (std::size_t p = 0; p < d.values.size(); ++p) {
      d.values[p] -= gv.back().values[p];
    }
    oracle = std::max(oracle, lp_norm(b, d, 2.0));
  }
  CHECK(oracle > 0);
  CHECK(iterate_distance(b, gu, gv, u.dt()) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(diagnostic_rho(1) == 2.0);
}
