#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "support.hpp"
#include "tnls/kernels.hpp"
#include "tnls/solver.hpp"

using namespace tnls;
namespace k = tnls::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(cplx)) == 0;
}

std::vector<cplx> random_vec(std::mt19937_64& rng, std::size_t n)
{
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) {
    x = {g(rng), g(rng)};
  }
  return v;
}

struct IsaGuard {
  k::Isa saved = k::active_isa();
  ~IsaGuard() { k::force_isa(saved); }
};

}  // namespace

TEST_CASE("scalar and avx2 kernels are bit-identical on random inputs")
{
  if (!k::isa_available(k::Isa::Avx2)) {
    MESSAGE("avx2 not available; nothing to compare");
    return;
  }
  std::mt19937_64 rng(7);
  // Lengths around the vector width exercise the scalar tails.
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 64u, 1001u}) {
    const auto x = random_vec(rng, n);
    const auto y0 = random_vec(rng, n);
    const cplx alpha(0.3, -1.7);

    auto ys = y0, ya = y0;
    k::scalar::caxpy(alpha, x, ys);
    k::avx2::caxpy(alpha, x, ya);
    CHECK(same_bits(ys, ya));

    std::vector<cplx> ms(n), ma(n);
    k::scalar::cmul(x, y0, ms);
    k::avx2::cmul(x, y0, ma);
    CHECK(same_bits(ms, ma));

    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = x[i].real() * 3.0 - 1.0;
    }
    std::vector<cplx> rs(n), ra(n);
    k::scalar::rscale(r, y0, rs);
    k::avx2::rscale(r, y0, ra);
    CHECK(same_bits(rs, ra));

    std::vector<double> as(n), aa(n);
    k::scalar::abs2(x, as);
    k::avx2::abs2(x, aa);
    CHECK(std::memcmp(as.data(), aa.data(), n * sizeof(double)) == 0);

    CHECK(same_bits(k::scalar::wsum(r, as), k::avx2::wsum(r, as)));
  }
}

TEST_CASE("dispatch follows force_isa")
{
  IsaGuard guard;
  k::force_isa(k::Isa::Scalar);
  CHECK(k::active_isa() == k::Isa::Scalar);
  CHECK(std::string(k::isa_name(k::Isa::Scalar)) == "scalar");
}

TEST_CASE("a full solve is bit-identical under both kernel sets")
{
  if (!k::isa_available(k::Isa::Avx2)) {
    return;
  }
  IsaGuard guard;
  const BasisTable& b = testing::shared_basis(2, 2);
  std::mt19937_64 rng(11);
  SpectralField f = testing::random_coeffs(b, rng, true);
  for (auto& c : f.coeffs) {
    c *= 0.05;
  }
  NonlinearitySpec spec;
  spec.m = 2;
  SolverConfig cfg;
  cfg.T = 0.1;
  cfg.n_steps = 10;

  auto run = [&](k::Isa isa, Scheme s) {
    k::force_isa(isa);
    SolverConfig c = cfg;
    c.scheme = s;
    SolutionTrace tr = solve(b, f, spec, c);
    compute_diagnostics(b, tr, spec);
    return tr;
  };
  for (Scheme s : {Scheme::Picard, Scheme::SplitStep}) {
    const SolutionTrace a = run(k::Isa::Scalar, s);
    const SolutionTrace c = run(k::Isa::Avx2, s);
    REQUIRE(a.size() == c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(same_bits(a.fields[i].coeffs, c.fields[i].coeffs));
      CHECK(same_bits(a.diagnostics[i].energy, c.diagnostics[i].energy));
      CHECK(same_bits(a.diagnostics[i].sobolev_rho, c.diagnostics[i].sobolev_rho));
    }
  }
}
