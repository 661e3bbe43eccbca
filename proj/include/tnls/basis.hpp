#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tnls {

using cplx = std::complex<double>;

namespace detail {
/// Process-wide counter that tags every table with a unique id.
std::uint64_t next_basis_id();
}  // namespace detail

/// Model size.  n complex dimensions, per-coordinate cutoff K on both indices
/// of every special Hermite pair, grid_order quadrature points per real axis.
struct ModelParams {
  int n = 2;
  int K = 3;
  int grid_order = 8;

  /// Throws Configuration on n outside {1, 2}, K < 0 or grid_order < 2K + 2.
  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

/// Working tolerances of the basis construction.
struct BasisTolerances {
  double orthonormality = 1e-8;  // Gram residual reported as valid
  double failure = 1e-6;         // Gram residual treated as a construction failure
  double ladder_threshold = 1e-10;
  double fd_step = 1e-2;         // step of the 8th-order derivative stencil

  bool operator==(const BasisTolerances&) const = default;
};

/// Sparse complex matrix in coordinate form, entries sorted by (col, row).
struct SparseMatrix {
  struct Entry {
    std::uint32_t row;
    std::uint32_t col;
    cplx value;
  };
  std::size_t dim = 0;
  std::vector<Entry> entries;

  /// out = M * in (out is overwritten).
  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  /// Largest number of entries above `threshold` in magnitude in any column.
  std::size_t max_column_count(double threshold) const;
};

/// Which ladder operator: Z_j (lowering) or Zbar_j (raising), j zero based.
struct Ladder {
  int coord = 0;
  bool bar = false;
};

/// Diagnostics recorded while the basis is built.
struct BasisReport {
  double orthonormality_residual = 0;  // max |Gram - I| over one plane
  double hermite_gram_residual = 0;    // quadrature exactness of the Hermite products
  double eigenvalue_residual = 0;      // max |quadrature L eigenvalue - (2 nu + 1)|
  double angular_residual = 0;         // max |angular eigenvalue - (nu - mu)|
  double ladder_composition_residual = 0;  // max |1/2 (Z Zbar + Zbar Z) - diag| on in-range columns
  double commutator_residual = 0;      // max |[Z, Zbar] - 2| on in-range columns
  std::size_t ladder_max_column_count = 0;
};

/// Precomputed special Hermite eigenbasis of the twisted Laplacian.
///
/// The basis on C^n is the tensor product of a single-plane basis; one plane
/// is (x, y) in R^2 with grid_order^2 tensor Gauss-Hermite nodes.  All tables
/// are stored per plane, which keeps memory at O(G^2 (K+1)^2) and makes the
/// transforms separable.  Immutable after construction.
///
/// Index conventions: the plane index is k = mu * (K + 1) + nu; the full index
/// is k_1 * (K+1)^{2(n-1)} + ... + k_n (plane 1 outermost).  Plane node
/// p = a * G + b sits at (x_a, y_b); full nodes follow the same nesting.
class BasisTable {
 public:
  BasisTable(ModelParams params, BasisTolerances tol);

  const ModelParams& params() const noexcept { return params_; }
  const BasisTolerances& tolerances() const noexcept { return tol_; }
  std::uint64_t id() const noexcept { return id_; }
  const BasisReport& report() const noexcept { return report_; }

  int n() const noexcept { return params_.n; }
  std::size_t size() const noexcept { return size_; }
  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t plane_size() const noexcept { return plane_size_; }
  std::size_t plane_nodes() const noexcept { return plane_nodes_; }

  int mu(std::size_t k, int coord) const;
  int nu(std::size_t k, int coord) const;
  std::size_t index(std::span<const int> mu, std::span<const int> nu) const;

  std::span<const double> axis_nodes() const noexcept { return axis_nodes_; }
  std::span<const double> axis_weights() const noexcept { return axis_weights_; }
  /// Quadrature weights of every full node (flat Lebesgue measure dz).
  std::span<const double> weights() const noexcept { return weights_; }
  /// Complex coordinate z_j = x_j + i y_j at every full node.
  std::span<const cplx> coordinate(int j) const { return coords_[j]; }
  /// Real coordinates (x_1, y_1, ..., x_n, y_n) of one full node.
  std::vector<double> node(std::size_t p) const;

  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }

  /// Plane tables, node-major (plane_nodes x plane_size).
  std::span<const cplx> plane_phi() const noexcept { return phi_; }
  std::span<const cplx> plane_phi_transposed() const noexcept { return phi_t_; }
  std::span<const cplx> plane_z_values() const noexcept { return z_values_; }
  std::span<const cplx> plane_zbar_values() const noexcept { return zbar_values_; }
  /// weight * conj(phi), node-major: the analysis operator of one plane.
  std::span<const cplx> plane_analysis() const noexcept { return analysis_; }

  /// Plane ladder matrices (plane_size x plane_size, row-major), thresholded.
  std::span<const cplx> plane_ladder(bool bar) const noexcept { return bar ? plane_zbar_ : plane_z_; }
  const SparseMatrix& ladder(Ladder which) const;

  /// Value of basis function k at an arbitrary point (x_1, y_1, ..., x_n, y_n).
  cplx evaluate(std::size_t k, std::span<const double> point) const;
  /// Expansion of plane function k in the products psi_i(x) psi_j(y).
  struct HermiteTerm {
    int i;
    int j;
    cplx coefficient;
  };
  std::span<const HermiteTerm> plane_expansion(std::size_t plane_k) const { return expansion_[plane_k]; }

 private:
  friend class BasisCacheAccess;
  BasisTable() = default;
  void construct();
  void lift_tables();

  ModelParams params_;
  BasisTolerances tol_;
  std::uint64_t id_ = 0;
  BasisReport report_;
  std::size_t size_ = 0, node_count_ = 0, plane_size_ = 0, plane_nodes_ = 0;

  std::vector<double> axis_nodes_, axis_weights_;
  std::vector<double> weights_;
  std::vector<std::vector<cplx>> coords_;
  std::vector<double> eigenvalues_;
  std::vector<cplx> phi_, phi_t_, z_values_, zbar_values_, analysis_;
  std::vector<cplx> plane_z_, plane_zbar_;
  std::vector<SparseMatrix> ladder_z_, ladder_zbar_;
  std::vector<std::vector<HermiteTerm>> expansion_;
};

BasisTable build_basis(const ModelParams& params, const BasisTolerances& tol = {});

/// Coefficients of a function in the truncated eigenbasis.
struct SpectralField {
  std::vector<cplx> coeffs;
  std::uint64_t basis_id = 0;
  bool overflow = false;  // a ladder step pushed mass past the cutoff

  static SpectralField zeros(const BasisTable& b);
  static SpectralField unit(const BasisTable& b, std::size_t k, cplx value = 1.0);
};

/// Samples of a function at the quadrature nodes.
struct GridField {
  std::vector<cplx> values;
  std::uint64_t basis_id = 0;

  static GridField zeros(const BasisTable& b);
};

SpectralField analyze(const BasisTable& b, const GridField& g);
GridField synthesize(const BasisTable& b, const SpectralField& c);

/// Spectral application of Z_j or Zbar_j through the ladder matrices.  Sets
/// `overflow` when a raising step meets mass above `shell_tol` (relative) on
/// the top shell nu_j = K.
SpectralField apply_ladder(const BasisTable& b, const SpectralField& c, Ladder which, double shell_tol = 1e-8);
SpectralField apply_L(const BasisTable& b, const SpectralField& c);
/// exp(-i t L) c.
SpectralField propagate_free(const BasisTable& b, const SpectralField& c, double t);

/// Grid-level application of Z_j / Zbar_j: the differential operator applied
/// to the synthesized function with the finite-difference derivative tables
/// plus multiplication by the coordinate.  Not limited by the cutoff.
GridField grid_apply_ladder(const BasisTable& b, const SpectralField& c, Ladder which);

/// l2 norm of the coefficients on the shell nu_j = K for some j.
double top_shell_norm(const BasisTable& b, const SpectralField& c);
/// True when the relative top-shell mass exceeds tol.
bool has_top_shell_mass(const BasisTable& b, const SpectralField& c, double tol);

/// Checks that both fields share a basis with b (throws Usage otherwise).
void require_basis(const BasisTable& b, std::uint64_t id, const char* what);

/// Max |Gram - I| of the full basis under the quadrature, computed column by
/// column as analyze(synthesize(e_k)).
double full_gram_residual(const BasisTable& b);

}  // namespace tnls
