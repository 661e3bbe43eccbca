#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tnls/error.hpp"
#include "tnls/verification.hpp"

using namespace tnls;

namespace {

ErrorKind range_error(const char* p1, const char* p2, int n)
{
  try {
    check_embedding_range(Rational::parse(p1), Rational::parse(p2), n);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;  // accepted
}

}  // namespace

TEST_CASE("embedding range branches")
{
  // p1 < 2n: p2 up to 2n p1 / (2n - p1).
  CHECK(range_error("2", "2", 2) == ErrorKind::Io);
  CHECK(range_error("2", "8/3", 2) == ErrorKind::Io);
  CHECK(range_error("2", "4", 2) == ErrorKind::Io);
  CHECK(range_error("2", "5", 2) == ErrorKind::Precondition);
  CHECK(range_error("3", "12", 2) == ErrorKind::Io);
  CHECK(range_error("3", "2", 2) == ErrorKind::Precondition);
  // p1 = 2n: every finite p2 >= p1.
  CHECK(range_error("4", "100", 2) == ErrorKind::Io);
  CHECK(range_error("4", "inf", 2) == ErrorKind::Precondition);
  // p1 > 2n: p2 = inf allowed.
  CHECK(range_error("5", "inf", 2) == ErrorKind::Io);
  CHECK(range_error("2", "inf", 1) == ErrorKind::Precondition);
  CHECK(range_error("3", "inf", 1) == ErrorKind::Io);
}

TEST_CASE("embedding report over random fields")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  RandomFieldSpec rs;
  rs.count = 12;
  const EstimateReport r = verify_embedding(b, rs, Rational(2), Rational(4));
  CHECK(r.sample_count == 12);
  CHECK(std::isfinite(r.fitted_constant));
  CHECK(r.fitted_constant > 0);
  CHECK(r.violation_count == 0);
  for (double ratio : r.ratios) {
    CHECK(ratio <= r.fitted_constant);
  }
  // Homogeneous of degree zero: rescaling the amplitudes leaves the ratios alone.
  RandomFieldSpec scaled = rs;
  scaled.amp_min *= 7;
  scaled.amp_max *= 7;
  const EstimateReport s = verify_embedding(b, scaled, Rational(2), Rational(4));
  CHECK(s.fitted_constant == doctest::Approx(r.fitted_constant).epsilon(1e-10));
  CHECK_THROWS_AS(verify_embedding(b, rs, Rational(2), Rational(5)), Error);
}

TEST_CASE("estimate reports")
{
  EstimateReport r;
  r.add(2.0, {1.0, 4.0}, 1);
  r.add(3.0, {2.0}, 2);
  r.finalize();
  CHECK(r.ratios[0] == 0.5);
  CHECK(r.ratios[1] == 1.5);
  CHECK(r.fitted_constant == 1.5);
  CHECK(r.fitted_for(1) == 0.5);
  CHECK(r.sample_count == 2);
  const auto j = to_json(r);
  CHECK(j["fitted_constant"] == 1.5);
}

TEST_CASE("random fields are reproducible and stay below the top shell")
{
  const BasisTable& b = testing::shared_basis(2, 3);
  RandomFieldSpec rs;
  rs.count = 5;
  rs.amp_min = 0.2;
  rs.amp_max = 3.0;
  const auto a = random_fields(b, rs);
  const auto c = random_fields(b, rs);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].coeffs == c[i].coeffs);
    CHECK(top_shell_norm(b, a[i]) == 0.0);
    CHECK(charge(a[i]) >= 0.2 * (1 - 1e-12));
    CHECK(charge(a[i]) <= 3.0 * (1 + 1e-12));
  }
  rs.seed += 1;
  CHECK(random_fields(b, rs)[0].coeffs != a[0].coeffs);
}

TEST_CASE("chain rule for S G_m(u) matches finite differences of the pointwise map")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  RandomFieldSpec rs;
  rs.count = 1;
  rs.amp_min = rs.amp_max = 4.0;
  const SpectralField c = random_fields(b, rs)[0];
  NonlinearitySpec spec;
  spec.m = 1;
  auto u_at = [&](const std::vector<double>& pt) {
    cplx s = 0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      s += c.coeffs[k] * b.evaluate(k, pt);
    }
    return s;
  };
  auto G_at = [&](const std::vector<double>& pt) {
    const cplx u = u_at(pt);
    return psi_m(std::abs(u), spec) * u;
  };
  const GridField id = apply_S_to_G_m(b, c, spec, {-1, false}, true);
  const GridField direct = eval_G_m(b, synthesize(b, c), spec);
  CHECK(testing::max_diff(id, direct) < 1e-13);
  const double h = 1e-4;
  for (int j = 0; j < 2; ++j) {
    for (bool bar : {false, true}) {
      const GridField sg = apply_S_to_G_m(b, c, spec, {j, bar}, false);
      for (std::size_t p : {std::size_t{5}, std::size_t{200}, b.node_count() / 2 + 3}) {
        const std::vector<double> pt = b.node(p);
        auto shifted = [&](int axis, double s) {
          auto q = pt;
          q[static_cast<std::size_t>(axis)] += s;
          return G_at(q);
        };
        const cplx dx = (shifted(2 * j, h) - shifted(2 * j, -h)) / (2 * h);
        const cplx dy = (shifted(2 * j + 1, h) - shifted(2 * j + 1, -h)) / (2 * h);
        const cplx z(pt[2 * j], pt[2 * j + 1]);
        const cplx I(0, 1);
        const cplx want = bar ? -(dx + I * dy) + z / 2.0 * G_at(pt) : (dx - I * dy) + std::conj(z) / 2.0 * G_at(pt);
        CHECK(std::abs(sg.values[p] - want) < 1e-6 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST_CASE("delta bound and log-log slopes")
{
  for (double C : {0.5, 3.0, 40.0}) {
    const double d = delta_bound(C, 2);
    CHECK(C * std::pow(4 * d, 2.0) == doctest::Approx(0.5));
  }
  std::vector<double> x{1, 2, 4, 8, 16}, y;
  for (double v : x) {
    y.push_back(3.0 * std::pow(v, -0.5));
  }
  CHECK(loglog_slope(x, y) == doctest::Approx(-0.5));
}

TEST_CASE("linear flow: stability distances are exactly proportional to epsilon")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  RandomFieldSpec rs;
  rs.count = 2;
  const auto fs = random_fields(b, rs);
  NonlinearitySpec spec;
  spec.lambda = 0;
  SolverConfig cfg;
  cfg.T = 0.3;
  cfg.n_steps = 20;
  const StabilityTable t = stability_experiment(b, fs[0], fs[1], {1e-1, 1e-2, 1e-3}, spec, cfg);
  CHECK(t.monotone);
  CHECK(t.ratio_spread == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("blowup monitor")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  RandomFieldSpec rs;
  rs.count = 1;
  rs.amp_min = rs.amp_max = 0.3;
  const SpectralField f = random_fields(b, rs)[0];
  SolverConfig cfg;
  cfg.T = 0.5;
  cfg.n_steps = 20;
  const AdmissiblePair cp = canonical_pair(2);
  NonlinearitySpec defocusing;
  NonlinearitySpec free;
  free.lambda = 0;
  const BlowupTrace bt = blowup_monitor(b, f, defocusing, cfg, cp, 100.0);
  const BlowupTrace ref = blowup_monitor(b, f, free, cfg, cp, 100.0);
  CHECK_FALSE(bt.growth);
  for (std::size_t k = 1; k < bt.running_norm.size(); ++k) {
    CHECK(bt.running_norm[k] >= bt.running_norm[k - 1]);
  }
  CHECK(bt.running_norm.back() <= 1.1 * ref.running_norm.back());
  CHECK_THROWS_AS(blowup_monitor(b, f, defocusing, cfg, {Rational::infinity(), Rational(2)}, 100.0), Error);
  CHECK(blowup_monitor(b, f, defocusing, cfg, cp, 1e-6).growth);
}

TEST_CASE("estimate reports are finite and resolution-independent in shape")
{
  const BasisTable& b = testing::shared_basis(2, 2);
  RandomFieldSpec rs;
  rs.count = 6;
  rs.amp_min = 1;
  rs.amp_max = 10;
  NonlinearitySpec spec;
  const SpaceTimeGrid grid{0.25, 8};
  const EstimateReport d = verify_difference_estimate(b, rs, spec, {1, 2, 4}, grid);
  CHECK(d.sample_count > 0);
  CHECK(std::isfinite(d.fitted_constant));
  CHECK(d.extras.count("m_spread") == 1);
  const EstimateReport t = verify_truncation_gap_batch(b, rs, spec, {1, 2, 4}, grid);
  CHECK(std::isfinite(t.fitted_constant));
  const auto ds = verify_derivative_bound(b, rs, spec, {1, 2, 4}, grid);
  CHECK(ds.size() == 5);
  for (const auto& r : ds) {
    CHECK(std::isfinite(r.fitted_constant));
  }
}
