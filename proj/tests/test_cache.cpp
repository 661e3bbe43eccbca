#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "support.hpp"
#include "tnls/basis_cache.hpp"
#include "tnls/error.hpp"

using namespace tnls;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name)
{
  const fs::path p = fs::temp_directory_path() / ("tnls_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool same_tables(const BasisTable& a, const BasisTable& c)
{
  auto eq = [](auto x, auto y) { return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin()); };
  return a.params() == c.params() && eq(a.plane_phi(), c.plane_phi()) && eq(a.eigenvalues(), c.eigenvalues()) &&
         eq(a.plane_ladder(true), c.plane_ladder(true)) && eq(a.plane_ladder(false), c.plane_ladder(false)) &&
         eq(a.plane_z_values(), c.plane_z_values()) && eq(a.weights(), c.weights()) &&
         eq(a.plane_analysis(), c.plane_analysis());
}

}  // namespace

TEST_CASE("basis cache round trip is exact")
{
  const fs::path dir = scratch("roundtrip");
  const BasisTable& b = testing::shared_basis(2, 2);
  save_basis(b, dir / "b.tnls");
  const BasisTable c = load_basis(dir / "b.tnls", b.params(), b.tolerances());
  CHECK(same_tables(b, c));
  CHECK(c.id() != b.id());
  const SpectralField f = SpectralField::unit(c, 3);
  CHECK(testing::max_diff(analyze(c, synthesize(c, f)), f) < 1e-12);
  fs::remove_all(dir);
}

TEST_CASE("damaged or foreign cache files are rejected")
{
  const fs::path dir = scratch("damaged");
  const BasisTable& b = testing::shared_basis(1, 2);
  save_basis(b, dir / "b.tnls");
  CHECK_THROWS_AS(load_basis(dir / "b.tnls", ModelParams{1, 2, 8}, {}), Error);
  CHECK_THROWS_AS(load_basis(dir / "missing.tnls", b.params(), {}), Error);

  const auto size = fs::file_size(dir / "b.tnls");
  fs::resize_file(dir / "b.tnls", size / 2);
  CHECK_THROWS_AS(load_basis(dir / "b.tnls", b.params(), {}), Error);

  save_basis(b, dir / "v.tnls");
  {
    std::fstream f(dir / "v.tnls", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    const std::uint32_t bad = kBasisCacheVersion + 1;
    f.write(reinterpret_cast<const char*>(&bad), 4);
  }
  try {
    load_basis(dir / "v.tnls", b.params(), {});
    FAIL("version mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  fs::remove_all(dir);
}

TEST_CASE("TNLS_CACHE_DIR stores and reuses tables")
{
  const fs::path dir = scratch("env");
  ::setenv("TNLS_CACHE_DIR", dir.c_str(), 1);
  const ModelParams p{1, 1, 4};
  const BasisTable a = cached_basis(p);
  CHECK(fs::exists(dir / basis_cache_name(p, {})));
  const BasisTable c = cached_basis(p);
  CHECK(same_tables(a, c));
  ::unsetenv("TNLS_CACHE_DIR");
  fs::remove_all(dir);
}
