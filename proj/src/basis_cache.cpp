#include "tnls/basis_cache.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tnls/error.hpp"

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

namespace tnls {

class BasisCacheAccess {
 public:
  static void write(const BasisTable& b, std::ostream& os);
  static BasisTable read(std::istream& is, const ModelParams& params, const BasisTolerances& tol);
};

namespace {

constexpr char kMagic[4] = {'T', 'N', 'L', 'S'};

template <class T>
void put(std::ostream& os, T v)
{
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is)
{
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) {
    throw Error(ErrorKind::Io, "basis cache: truncated file");
  }
  return v;
}

void put_doubles(std::ostream& os, const std::vector<double>& v)
{
  put<std::uint64_t>(os, v.size());
  for (double x : v) {
    put(os, x);
  }
}

void put_complex(std::ostream& os, const std::vector<cplx>& v)
{
  put<std::uint64_t>(os, v.size());
  for (const cplx& x : v) {
    put(os, x.real());
    put(os, x.imag());
  }
}

std::uint64_t get_count(std::istream& is, std::uint64_t expected, const char* what)
{
  const auto count = get<std::uint64_t>(is);
  if (count != expected) {
    throw Error(ErrorKind::Io, std::string("basis cache: unexpected length of ") + what);
  }
  return count;
}

std::vector<double> get_doubles(std::istream& is, std::uint64_t expected, const char* what)
{
  std::vector<double> v(get_count(is, expected, what));
  for (double& x : v) {
    x = get<double>(is);
  }
  return v;
}

std::vector<cplx> get_complex(std::istream& is, std::uint64_t expected, const char* what)
{
  std::vector<cplx> v(get_count(is, expected, what));
  for (cplx& x : v) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    x = cplx(re, im);
  }
  return v;
}

void put_triplets(std::ostream& os, const std::vector<cplx>& dense, std::size_t kp)
{
  std::uint64_t count = 0;
  for (const cplx& v : dense) {
    count += v != cplx{};
  }
  put(os, count);
  for (std::size_t r = 0; r < kp; ++r) {
    for (std::size_t c = 0; c < kp; ++c) {
      const cplx v = dense[r * kp + c];
      if (v != cplx{}) {
        put<std::uint32_t>(os, static_cast<std::uint32_t>(r));
        put<std::uint32_t>(os, static_cast<std::uint32_t>(c));
        put(os, v.real());
        put(os, v.imag());
      }
    }
  }
}

std::vector<cplx> get_triplets(std::istream& is, std::size_t kp)
{
  const auto count = get<std::uint64_t>(is);
  if (count > kp * kp) {
    throw Error(ErrorKind::Io, "basis cache: corrupt ladder block");
  }
  std::vector<cplx> dense(kp * kp, cplx{});
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto r = get<std::uint32_t>(is);
    const auto c = get<std::uint32_t>(is);
    const double re = get<double>(is);
    const double im = get<double>(is);
    if (r >= kp || c >= kp) {
      throw Error(ErrorKind::Io, "basis cache: ladder index out of range");
    }
    dense[r * kp + c] = cplx(re, im);
  }
  return dense;
}

}  // namespace

void BasisCacheAccess::write(const BasisTable& b, std::ostream& os)
{
  os.write(kMagic, 4);
  put(os, kBasisCacheVersion);
  put<std::int32_t>(os, b.params_.n);
  put<std::int32_t>(os, b.params_.K);
  put<std::int32_t>(os, b.params_.grid_order);
  put(os, b.tol_.orthonormality);
  put(os, b.tol_.failure);
  put(os, b.tol_.ladder_threshold);
  put(os, b.tol_.fd_step);
  put_doubles(os, b.axis_nodes_);
  put_doubles(os, b.axis_weights_);
  put_complex(os, b.phi_);
  put_doubles(os, b.eigenvalues_);
  put_triplets(os, b.plane_z_, b.plane_size_);
  put_triplets(os, b.plane_zbar_, b.plane_size_);
  put_complex(os, b.z_values_);
  put_complex(os, b.zbar_values_);
  put<std::uint64_t>(os, b.expansion_.size());
  for (const auto& terms : b.expansion_) {
    put<std::uint64_t>(os, terms.size());
    for (const auto& t : terms) {
      put<std::int32_t>(os, t.i);
      put<std::int32_t>(os, t.j);
      put(os, t.coefficient.real());
      put(os, t.coefficient.imag());
    }
  }
  const BasisReport& r = b.report_;
  put(os, r.orthonormality_residual);
  put(os, r.hermite_gram_residual);
  put(os, r.eigenvalue_residual);
  put(os, r.angular_residual);
  put(os, r.ladder_composition_residual);
  put(os, r.commutator_residual);
}

BasisTable BasisCacheAccess::read(std::istream& is, const ModelParams& params, const BasisTolerances& tol)
{
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorKind::Io, "basis cache: bad magic");
  }
  if (get<std::uint32_t>(is) != kBasisCacheVersion) {
    throw Error(ErrorKind::Io, "basis cache: unsupported format version");
  }
  BasisTable b;
  b.params_.n = get<std::int32_t>(is);
  b.params_.K = get<std::int32_t>(is);
  b.params_.grid_order = get<std::int32_t>(is);
  b.tol_.orthonormality = get<double>(is);
  b.tol_.failure = get<double>(is);
  b.tol_.ladder_threshold = get<double>(is);
  b.tol_.fd_step = get<double>(is);
  if (!(b.params_ == params) || !(b.tol_ == tol)) {
    throw Error(ErrorKind::Io, "basis cache: file was built for different parameters");
  }
  params.validate();
  const std::size_t G = static_cast<std::size_t>(params.grid_order);
  const std::size_t K1 = static_cast<std::size_t>(params.K) + 1;
  b.plane_size_ = K1 * K1;
  b.plane_nodes_ = G * G;
  const std::size_t kp = b.plane_size_;
  const std::size_t gp = b.plane_nodes_;
  std::size_t full = 1;
  for (int j = 0; j < params.n; ++j) {
    full *= kp;
  }
  b.axis_nodes_ = get_doubles(is, G, "axis nodes");
  b.axis_weights_ = get_doubles(is, G, "axis weights");
  b.phi_ = get_complex(is, gp * kp, "phi");
  const std::vector<double> eig = get_doubles(is, full, "eigenvalues");
  b.plane_z_ = get_triplets(is, kp);
  b.plane_zbar_ = get_triplets(is, kp);
  b.z_values_ = get_complex(is, gp * kp, "Z table");
  b.zbar_values_ = get_complex(is, gp * kp, "Zbar table");
  b.expansion_.resize(get_count(is, kp, "expansions"));
  for (auto& terms : b.expansion_) {
    terms.resize(get<std::uint64_t>(is));
    for (auto& t : terms) {
      t.i = get<std::int32_t>(is);
      t.j = get<std::int32_t>(is);
      const double re = get<double>(is);
      const double im = get<double>(is);
      t.coefficient = cplx(re, im);
    }
  }
  b.report_.orthonormality_residual = get<double>(is);
  b.report_.hermite_gram_residual = get<double>(is);
  b.report_.eigenvalue_residual = get<double>(is);
  b.report_.angular_residual = get<double>(is);
  b.report_.ladder_composition_residual = get<double>(is);
  b.report_.commutator_residual = get<double>(is);

  b.phi_t_.assign(gp * kp, cplx{});
  b.analysis_.assign(gp * kp, cplx{});
  for (std::size_t p = 0; p < gp; ++p) {
    const double w = b.axis_weights_[p / G] * b.axis_weights_[p % G];
    for (std::size_t k = 0; k < kp; ++k) {
      b.phi_t_[k * gp + p] = b.phi_[p * kp + k];
      b.analysis_[p * kp + k] = w * std::conj(b.phi_[p * kp + k]);
    }
  }
  b.id_ = detail::next_basis_id();
  b.lift_tables();
  if (b.eigenvalues_ != eig) {
    throw Error(ErrorKind::Io, "basis cache: eigenvalue table does not match the index layout");
  }
  return b;
}

void save_basis(const BasisTable& b, const std::filesystem::path& file)
{
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) {
      throw Error(ErrorKind::Io, "cannot write basis cache " + tmp.string());
    }
    BasisCacheAccess::write(b, os);
    if (!os) {
      throw Error(ErrorKind::Io, "error writing basis cache " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, file);
}

BasisTable load_basis(const std::filesystem::path& file, const ModelParams& params, const BasisTolerances& tol)
{
  std::ifstream is(file, std::ios::binary);
  if (!is) {
    throw Error(ErrorKind::Io, "cannot open basis cache " + file.string());
  }
  return BasisCacheAccess::read(is, params, tol);
}

std::string basis_cache_name(const ModelParams& params, const BasisTolerances& tol)
{
  // Tolerances enter the name through their bit patterns.
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : {tol.orthonormality, tol.failure, tol.ladder_threshold, tol.fd_step}) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ULL;
    }
  }
  std::ostringstream os;
  os << "basis_n" << params.n << "_K" << params.K << "_G" << params.grid_order << "_" << std::hex << h
     << ".tnls";
  return os.str();
}

BasisTable cached_basis(const ModelParams& params, const BasisTolerances& tol)
{
  const char* dir = std::getenv("TNLS_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') {
    return BasisTable(params, tol);
  }
  const std::filesystem::path file = std::filesystem::path(dir) / basis_cache_name(params, tol);
  if (std::filesystem::exists(file)) {
    try {
      return load_basis(file, params, tol);
    } catch (const Error&) {
      // stale or damaged: rebuild below
    }
  }
  BasisTable b(params, tol);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  try {
    save_basis(b, file);
  } catch (const std::exception&) {
    // a read-only cache directory is not fatal
  }
  return b;
}

}  // namespace tnls
