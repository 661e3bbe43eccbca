#include "tnls/basis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "tnls/error.hpp"
#include "tnls/kernels.hpp"
#include "tnls/quadrature.hpp"

namespace tnls {

std::uint64_t detail::next_basis_id()
{
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

namespace {

std::size_t ipow(std::size_t base, int e)
{
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) {
    r *= base;
  }
  return r;
}

// 8th-order central first-derivative stencil.
constexpr double kStencil[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};

std::vector<double> fd_hermite_derivatives(int max_degree, double x, double h)
{
  std::vector<double> d(static_cast<std::size_t>(max_degree) + 1, 0.0);
  for (int s = 1; s <= 4; ++s) {
    const std::vector<double> plus = scaled_hermite_functions(max_degree, x + s * h);
    const std::vector<double> minus = scaled_hermite_functions(max_degree, x - s * h);
    for (int i = 0; i <= max_degree; ++i) {
      d[i] += kStencil[s - 1] * (plus[i] - minus[i]);
    }
  }
  for (double& v : d) {
    v /= h;
  }
  return d;
}

// Synthesis with one node-major table per plane: values[p_1..p_n] =
// sum_k prod_j T_j[p_j][k_j] c[k].
std::vector<cplx> synthesize_tables(std::size_t plane_nodes, std::size_t plane_size, int n,
                                    std::span<const cplx> coeffs,
                                    const std::vector<std::span<const cplx>>& transposed,
                                    const std::vector<std::span<const cplx>>& node_major)
{
  const std::size_t gp = plane_nodes;
  const std::size_t kp = plane_size;
  if (n == 1) {
    std::vector<cplx> out(gp, cplx{});
    for (std::size_t k = 0; k < kp; ++k) {
      if (coeffs[k] != cplx{}) {
        kernels::caxpy(coeffs[k], transposed[0].subspan(k * gp, gp), out);
      }
    }
    return out;
  }
  // n == 2: T = C * Y^T (kp x gp), then V = X * T (gp x gp).
  std::vector<cplx> tmp(kp * gp, cplx{});
  for (std::size_t k1 = 0; k1 < kp; ++k1) {
    std::span<cplx> row(tmp.data() + k1 * gp, gp);
    for (std::size_t k2 = 0; k2 < kp; ++k2) {
      const cplx c = coeffs[k1 * kp + k2];
      if (c != cplx{}) {
        kernels::caxpy(c, transposed[1].subspan(k2 * gp, gp), row);
      }
    }
  }
  std::vector<cplx> out(gp * gp, cplx{});
  for (std::size_t p1 = 0; p1 < gp; ++p1) {
    std::span<cplx> row(out.data() + p1 * gp, gp);
    for (std::size_t k1 = 0; k1 < kp; ++k1) {
      const cplx x = node_major[0][p1 * kp + k1];
      if (x != cplx{}) {
        kernels::caxpy(x, std::span<const cplx>(tmp.data() + k1 * gp, gp), row);
      }
    }
  }
  return out;
}

std::vector<cplx> transpose(std::span<const cplx> a, std::size_t rows, std::size_t cols)
{
  std::vector<cplx> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      t[c * rows + r] = a[r * cols + c];
    }
  }
  return t;
}

}  // namespace

void ModelParams::validate() const
{
  if (n != 1 && n != 2) {
    throw Error(ErrorKind::Configuration, "model.n must be 1 or 2");
  }
  if (K < 0) {
    throw Error(ErrorKind::Configuration, "model.K must be >= 0");
  }
  if (grid_order < 2 * K + 2) {
    std::ostringstream os;
    os << "model.grid_order = " << grid_order << " is below 2K + 2 = " << 2 * K + 2;
    throw Error(ErrorKind::Configuration, os.str());
  }
}

void SparseMatrix::apply(std::span<const cplx> in, std::span<cplx> out) const
{
  std::fill(out.begin(), out.end(), cplx{});
  for (const Entry& e : entries) {
    out[e.row] += e.value * in[e.col];
  }
}

std::size_t SparseMatrix::max_column_count(double threshold) const
{
  std::vector<std::size_t> count(dim, 0);
  for (const Entry& e : entries) {
    if (std::abs(e.value) > threshold) {
      ++count[e.col];
    }
  }
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

BasisTable::BasisTable(ModelParams params, BasisTolerances tol) : params_(params), tol_(tol)
{
  params_.validate();
  id_ = detail::next_basis_id();
  construct();
  lift_tables();
}

BasisTable build_basis(const ModelParams& params, const BasisTolerances& tol)
{
  return BasisTable(params, tol);
}

void BasisTable::construct()
{
  const int K = params_.K;
  const int G = params_.grid_order;
  const int dmax = 2 * K;
  plane_size_ = static_cast<std::size_t>(K + 1) * (K + 1);
  plane_nodes_ = static_cast<std::size_t>(G) * G;
  const std::size_t kp = plane_size_;
  const std::size_t gp = plane_nodes_;

  const FlatRule rule = compensated_hermite_rule(G);
  axis_nodes_ = rule.nodes;
  axis_weights_ = rule.weights;

  std::vector<std::vector<double>> psi(G), dpsi(G);
  for (int a = 0; a < G; ++a) {
    psi[a] = scaled_hermite_functions(dmax, axis_nodes_[a]);
    dpsi[a] = fd_hermite_derivatives(dmax, axis_nodes_[a], tol_.fd_step);
  }

  // Hermite products of total degree <= 2K span every Phi_{mu nu} with
  // mu, nu <= K and are invariant under L and the angular operator.
  std::vector<std::pair<int, int>> herm;
  for (int N = 0; N <= dmax; ++N) {
    for (int i = 0; i <= N; ++i) {
      herm.emplace_back(i, N - i);
    }
  }
  const std::size_t dim = herm.size();

  std::vector<double> pw(gp), px(gp), py(gp);
  for (int a = 0; a < G; ++a) {
    for (int b = 0; b < G; ++b) {
      const std::size_t p = static_cast<std::size_t>(a) * G + b;
      pw[p] = axis_weights_[a] * axis_weights_[b];
      px[p] = axis_nodes_[a];
      py[p] = axis_nodes_[b];
    }
  }

  // Values, Z- and Zbar-images of every Hermite product at the plane nodes
  // (dim x gp).  Z = (d/dx - i d/dy) + (x - iy)/2, Zbar = -(d/dx + i d/dy) + (x + iy)/2.
  const cplx I(0.0, 1.0);
  Eigen::MatrixXcd val(dim, gp), zv(dim, gp), zbv(dim, gp), ang(dim, gp);
  for (std::size_t e = 0; e < dim; ++e) {
    const auto [i, j] = herm[e];
    for (int a = 0; a < G; ++a) {
      for (int b = 0; b < G; ++b) {
        const std::size_t p = static_cast<std::size_t>(a) * G + b;
        const double v = psi[a][i] * psi[b][j];
        const double dx = dpsi[a][i] * psi[b][j];
        const double dy = psi[a][i] * dpsi[b][j];
        const cplx z(px[p], py[p]);
        val(e, p) = v;
        zv(e, p) = cplx(dx, -dy) + 0.5 * std::conj(z) * v;
        zbv(e, p) = -cplx(dx, dy) + 0.5 * z * v;
        ang(e, p) = -I * (px[p] * dy - py[p] * dx);
      }
    }
  }
  const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(pw.data(), static_cast<Eigen::Index>(gp));
  const auto inner = [&](const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right) {
    return Eigen::MatrixXcd(left.conjugate() * wv.asDiagonal() * right.transpose());
  };

  const Eigen::MatrixXcd hgram = inner(val, val);
  report_.hermite_gram_residual = (hgram - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();

  // L = 1/2 (Z Zbar + Zbar Z) in weak form: <e, Z Zbar f> = <Zbar e, Zbar f>.
  Eigen::MatrixXcd Lm = 0.5 * (inner(zbv, zbv) + inner(zv, zv));
  Lm = 0.5 * (Lm + Lm.adjoint()).eval();
  Eigen::MatrixXcd Am = inner(val, ang);
  Am = 0.5 * (Am + Am.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> les(Lm);
  const Eigen::VectorXd lam = les.eigenvalues();
  const Eigen::MatrixXcd lvec = les.eigenvectors();

  // Split every degenerate eigenspace of L by the angular operator.
  std::map<std::pair<int, int>, Eigen::VectorXcd> found;
  double eig_res = 0.0, ang_res = 0.0;
  std::size_t start = 0;
  while (start < dim) {
    std::size_t stop = start + 1;
    while (stop < dim && lam(stop) - lam(stop - 1) < 0.5) {
      ++stop;
    }
    const Eigen::Index d = static_cast<Eigen::Index>(stop - start);
    const Eigen::MatrixXcd V = lvec.middleCols(static_cast<Eigen::Index>(start), d);
    const double mean = lam.segment(static_cast<Eigen::Index>(start), d).mean();
    const int nu = static_cast<int>(std::lround((mean - 1.0) / 2.0));
    for (Eigen::Index r = 0; r < d; ++r) {
      eig_res = std::max(eig_res, std::abs(lam(static_cast<Eigen::Index>(start) + r) - (2.0 * nu + 1.0)));
    }
    Eigen::MatrixXcd Ag = V.adjoint() * Am * V;
    Ag = 0.5 * (Ag + Ag.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> aes(Ag);
    for (Eigen::Index r = 0; r < d; ++r) {
      const double l = aes.eigenvalues()(r);
      const int lr = static_cast<int>(std::lround(l));
      ang_res = std::max(ang_res, std::abs(l - lr));
      const int mu = nu - lr;
      if (mu < 0 || found.count({mu, nu})) {
        std::ostringstream os;
        os << "basis construction: inconsistent joint eigenvalue (nu=" << nu << ", l=" << l << ")";
        throw Error(ErrorKind::BasisConstruction, os.str());
      }
      found[{mu, nu}] = V * aes.eigenvectors().col(r);
    }
    start = stop;
  }
  report_.eigenvalue_residual = eig_res;
  report_.angular_residual = ang_res;
  if (eig_res > tol_.failure || ang_res > tol_.failure) {
    std::ostringstream os;
    os << "basis construction: eigenvalue residual " << eig_res << ", angular residual " << ang_res;
    throw Error(ErrorKind::BasisConstruction, os.str());
  }

  // Phases: Phi_{mu,0} has its leading Hermite coefficient real positive;
  // Phi_{mu,nu+1} is chosen so <Phi_{mu,nu+1}, Zbar Phi_{mu,nu}> > 0.
  std::vector<Eigen::VectorXcd> vecs(kp);
  for (int mu = 0; mu <= K; ++mu) {
    for (int nu = 0; nu <= K; ++nu) {
      auto it = found.find({mu, nu});
      if (it == found.end()) {
        throw Error(ErrorKind::BasisConstruction, "basis construction: missing special Hermite pair");
      }
      Eigen::VectorXcd v = it->second;
      cplx phase;
      if (nu == 0) {
        const double vmax = v.cwiseAbs().maxCoeff();
        Eigen::Index lead = 0;
        while (std::abs(v(lead)) < (1.0 - 1e-6) * vmax) {
          ++lead;
        }
        phase = std::conj(v(lead)) / std::abs(v(lead));
      } else {
        const Eigen::VectorXcd& prev = vecs[static_cast<std::size_t>(mu) * (K + 1) + nu - 1];
        // <v, Zbar prev> in the Hermite basis via node values.
        const Eigen::VectorXcd vn = val.transpose() * v;
        const Eigen::VectorXcd zp = zbv.transpose() * prev;
        // c = sum w conj(vn) zp; rotating v by e^{i theta} multiplies it by e^{-i theta}.
        const cplx c = vn.cwiseProduct(wv.cast<cplx>()).dot(zp);
        phase = c / std::abs(c);
      }
      vecs[static_cast<std::size_t>(mu) * (K + 1) + nu] = v * phase;
    }
  }

  phi_.assign(gp * kp, cplx{});
  z_values_.assign(gp * kp, cplx{});
  zbar_values_.assign(gp * kp, cplx{});
  analysis_.assign(gp * kp, cplx{});
  expansion_.assign(kp, {});
  for (std::size_t k = 0; k < kp; ++k) {
    const Eigen::VectorXcd nodev = val.transpose() * vecs[k];
    const Eigen::VectorXcd zn = zv.transpose() * vecs[k];
    const Eigen::VectorXcd zbn = zbv.transpose() * vecs[k];
    for (std::size_t p = 0; p < gp; ++p) {
      phi_[p * kp + k] = nodev(static_cast<Eigen::Index>(p));
      z_values_[p * kp + k] = zn(static_cast<Eigen::Index>(p));
      zbar_values_[p * kp + k] = zbn(static_cast<Eigen::Index>(p));
      analysis_[p * kp + k] = pw[p] * std::conj(phi_[p * kp + k]);
    }
    for (std::size_t e = 0; e < dim; ++e) {
      const cplx c = vecs[k](static_cast<Eigen::Index>(e));
      if (std::abs(c) > 1e-15) {
        expansion_[k].push_back({herm[e].first, herm[e].second, c});
      }
    }
  }
  phi_t_ = transpose(phi_, gp, kp);

  // Plane Gram and ladder matrices by quadrature.
  double gram_res = 0.0;
  plane_z_.assign(kp * kp, cplx{});
  plane_zbar_.assign(kp * kp, cplx{});
  for (std::size_t r = 0; r < kp; ++r) {
    for (std::size_t c = 0; c < kp; ++c) {
      cplx g{}, mz{}, mzb{};
      for (std::size_t p = 0; p < gp; ++p) {
        const cplx a = analysis_[p * kp + r];
        g += a * phi_[p * kp + c];
        mz += a * z_values_[p * kp + c];
        mzb += a * zbar_values_[p * kp + c];
      }
      gram_res = std::max(gram_res, std::abs(g - (r == c ? 1.0 : 0.0)));
      plane_z_[r * kp + c] = std::abs(mz) > tol_.ladder_threshold ? mz : cplx{};
      plane_zbar_[r * kp + c] = std::abs(mzb) > tol_.ladder_threshold ? mzb : cplx{};
    }
  }
  report_.orthonormality_residual = gram_res;
  if (gram_res > tol_.failure) {
    std::ostringstream os;
    os << "basis construction: orthonormality residual " << gram_res << " exceeds " << tol_.failure;
    throw Error(ErrorKind::BasisConstruction, os.str());
  }

  // 1/2 (Z Zbar + Zbar Z) and [Z, Zbar] on columns whose raised image stays in range.
  double comp_res = 0.0, comm_res = 0.0;
  for (std::size_t c = 0; c < kp; ++c) {
    if (static_cast<int>(c % (K + 1)) == K) {
      continue;
    }
    for (std::size_t r = 0; r < kp; ++r) {
      cplx zzb{}, zbz{};
      for (std::size_t q = 0; q < kp; ++q) {
        zzb += plane_z_[r * kp + q] * plane_zbar_[q * kp + c];
        zbz += plane_zbar_[r * kp + q] * plane_z_[q * kp + c];
      }
      const double nu = static_cast<double>(c % (K + 1));
      const double diag = r == c ? 2.0 * nu + 1.0 : 0.0;
      comp_res = std::max(comp_res, std::abs(0.5 * (zzb + zbz) - diag));
      comm_res = std::max(comm_res, std::abs(zzb - zbz - (r == c ? 2.0 : 0.0)));
    }
  }
  report_.ladder_composition_residual = comp_res;
  report_.commutator_residual = comm_res;
}

void BasisTable::lift_tables()
{
  const int n = params_.n;
  const int G = params_.grid_order;
  const std::size_t kp = plane_size_;
  const std::size_t gp = plane_nodes_;
  size_ = ipow(kp, n);
  node_count_ = ipow(gp, n);

  std::vector<double> pw(gp);
  std::vector<cplx> pz(gp);
  for (int a = 0; a < G; ++a) {
    for (int b = 0; b < G; ++b) {
      const std::size_t p = static_cast<std::size_t>(a) * G + b;
      pw[p] = axis_weights_[a] * axis_weights_[b];
      pz[p] = cplx(axis_nodes_[a], axis_nodes_[b]);
    }
  }
  weights_.assign(node_count_, 1.0);
  coords_.assign(n, std::vector<cplx>(node_count_));
  for (std::size_t p = 0; p < node_count_; ++p) {
    std::size_t rem = p;
    for (int j = n - 1; j >= 0; --j) {
      const std::size_t pj = rem % gp;
      rem /= gp;
      weights_[p] *= pw[pj];
      coords_[j][p] = pz[pj];
    }
  }

  eigenvalues_.assign(size_, 0.0);
  for (std::size_t k = 0; k < size_; ++k) {
    double lam = 0.0;
    for (int j = 0; j < n; ++j) {
      lam += 2.0 * nu(k, j) + 1.0;
    }
    eigenvalues_[k] = lam;
  }

  ladder_z_.assign(n, {});
  ladder_zbar_.assign(n, {});
  for (int j = 0; j < n; ++j) {
    const std::size_t stride = ipow(kp, n - 1 - j);
    for (int bar = 0; bar < 2; ++bar) {
      const std::vector<cplx>& plane = bar ? plane_zbar_ : plane_z_;
      SparseMatrix m;
      m.dim = size_;
      for (std::size_t col = 0; col < size_; ++col) {
        const std::size_t kj = (col / stride) % kp;
        const std::size_t base = col - kj * stride;
        for (std::size_t r = 0; r < kp; ++r) {
          const cplx v = plane[r * kp + kj];
          if (v != cplx{}) {
            m.entries.push_back({static_cast<std::uint32_t>(base + r * stride), static_cast<std::uint32_t>(col), v});
          }
        }
      }
      (bar ? ladder_zbar_ : ladder_z_)[j] = std::move(m);
    }
  }
  std::size_t maxc = 0;
  for (int j = 0; j < n; ++j) {
    maxc = std::max({maxc, ladder_z_[j].max_column_count(tol_.ladder_threshold),
                     ladder_zbar_[j].max_column_count(tol_.ladder_threshold)});
  }
  report_.ladder_max_column_count = maxc;
}

int BasisTable::mu(std::size_t k, int coord) const
{
  const std::size_t kj = (k / ipow(plane_size_, params_.n - 1 - coord)) % plane_size_;
  return static_cast<int>(kj / static_cast<std::size_t>(params_.K + 1));
}

int BasisTable::nu(std::size_t k, int coord) const
{
  const std::size_t kj = (k / ipow(plane_size_, params_.n - 1 - coord)) % plane_size_;
  return static_cast<int>(kj % static_cast<std::size_t>(params_.K + 1));
}

std::size_t BasisTable::index(std::span<const int> mu, std::span<const int> nu) const
{
  std::size_t k = 0;
  for (int j = 0; j < params_.n; ++j) {
    if (mu[j] < 0 || mu[j] > params_.K || nu[j] < 0 || nu[j] > params_.K) {
      throw Error(ErrorKind::Usage, "multi-index outside the cutoff");
    }
    k = k * plane_size_ + static_cast<std::size_t>(mu[j]) * (params_.K + 1) + nu[j];
  }
  return k;
}

std::vector<double> BasisTable::node(std::size_t p) const
{
  std::vector<double> out(2 * static_cast<std::size_t>(params_.n));
  for (int j = 0; j < params_.n; ++j) {
    out[2 * j] = coords_[j][p].real();
    out[2 * j + 1] = coords_[j][p].imag();
  }
  return out;
}

const SparseMatrix& BasisTable::ladder(Ladder which) const
{
  if (which.coord < 0 || which.coord >= params_.n) {
    throw Error(ErrorKind::Usage, "ladder coordinate out of range");
  }
  return which.bar ? ladder_zbar_[which.coord] : ladder_z_[which.coord];
}

cplx BasisTable::evaluate(std::size_t k, std::span<const double> point) const
{
  cplx value = 1.0;
  const int dmax = 2 * params_.K;
  for (int j = 0; j < params_.n; ++j) {
    const std::size_t kj = (k / ipow(plane_size_, params_.n - 1 - j)) % plane_size_;
    const std::vector<double> hx = scaled_hermite_functions(dmax, point[2 * j]);
    const std::vector<double> hy = scaled_hermite_functions(dmax, point[2 * j + 1]);
    cplx s{};
    for (const HermiteTerm& t : expansion_[kj]) {
      s += t.coefficient * hx[t.i] * hy[t.j];
    }
    value *= s;
  }
  return value;
}

SpectralField SpectralField::zeros(const BasisTable& b)
{
  return SpectralField{std::vector<cplx>(b.size(), cplx{}), b.id(), false};
}

SpectralField SpectralField::unit(const BasisTable& b, std::size_t k, cplx value)
{
  SpectralField f = zeros(b);
  f.coeffs.at(k) = value;
  return f;
}

GridField GridField::zeros(const BasisTable& b)
{
  return GridField{std::vector<cplx>(b.node_count(), cplx{}), b.id()};
}

void require_basis(const BasisTable& b, std::uint64_t id, const char* what)
{
  if (id != b.id()) {
    throw Error(ErrorKind::Usage, std::string(what) + " belongs to a different basis table");
  }
}

GridField synthesize(const BasisTable& b, const SpectralField& c)
{
  require_basis(b, c.basis_id, "spectral field");
  if (c.coeffs.size() != b.size()) {
    throw Error(ErrorKind::Usage, "spectral field has the wrong length");
  }
  std::vector<std::span<const cplx>> tr(b.n(), b.plane_phi_transposed());
  std::vector<std::span<const cplx>> nm(b.n(), b.plane_phi());
  return GridField{synthesize_tables(b.plane_nodes(), b.plane_size(), b.n(), c.coeffs, tr, nm), b.id()};
}

SpectralField analyze(const BasisTable& b, const GridField& g)
{
  require_basis(b, g.basis_id, "grid field");
  if (g.values.size() != b.node_count()) {
    throw Error(ErrorKind::Usage, "grid field has the wrong length");
  }
  const std::size_t gp = b.plane_nodes();
  const std::size_t kp = b.plane_size();
  const std::span<const cplx> an = b.plane_analysis();
  SpectralField out = SpectralField::zeros(b);
  if (b.n() == 1) {
    for (std::size_t p = 0; p < gp; ++p) {
      if (g.values[p] != cplx{}) {
        kernels::caxpy(g.values[p], an.subspan(p * kp, kp), out.coeffs);
      }
    }
    return out;
  }
  // S = g * A (gp x kp), then c = A^T * S.
  std::vector<cplx> s(gp * kp, cplx{});
  for (std::size_t p1 = 0; p1 < gp; ++p1) {
    std::span<cplx> row(s.data() + p1 * kp, kp);
    for (std::size_t p2 = 0; p2 < gp; ++p2) {
      const cplx v = g.values[p1 * gp + p2];
      if (v != cplx{}) {
        kernels::caxpy(v, an.subspan(p2 * kp, kp), row);
      }
    }
  }
  for (std::size_t p1 = 0; p1 < gp; ++p1) {
    const std::span<const cplx> srow(s.data() + p1 * kp, kp);
    for (std::size_t k1 = 0; k1 < kp; ++k1) {
      const cplx a = an[p1 * kp + k1];
      kernels::caxpy(a, srow, std::span<cplx>(out.coeffs.data() + k1 * kp, kp));
    }
  }
  return out;
}

double top_shell_norm(const BasisTable& b, const SpectralField& c)
{
  double s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    for (int j = 0; j < b.n(); ++j) {
      if (b.nu(k, j) == b.params().K) {
        s += std::norm(c.coeffs[k]);
        break;
      }
    }
  }
  return std::sqrt(s);
}

bool has_top_shell_mass(const BasisTable& b, const SpectralField& c, double tol)
{
  double total = 0.0;
  for (const cplx& v : c.coeffs) {
    total += std::norm(v);
  }
  const double shell = top_shell_norm(b, c);
  return shell > tol * std::max(std::sqrt(total), 1e-300);
}

SpectralField apply_ladder(const BasisTable& b, const SpectralField& c, Ladder which, double shell_tol)
{
  require_basis(b, c.basis_id, "spectral field");
  SpectralField out = SpectralField::zeros(b);
  b.ladder(which).apply(c.coeffs, out.coeffs);
  out.overflow = c.overflow;
  if (which.bar) {
    double shell = 0.0, total = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      total += std::norm(c.coeffs[k]);
      if (b.nu(k, which.coord) == b.params().K) {
        shell += std::norm(c.coeffs[k]);
      }
    }
    if (std::sqrt(shell) > shell_tol * std::max(std::sqrt(total), 1e-300)) {
      out.overflow = true;
    }
  }
  return out;
}

SpectralField apply_L(const BasisTable& b, const SpectralField& c)
{
  require_basis(b, c.basis_id, "spectral field");
  SpectralField out = c;
  for (std::size_t k = 0; k < b.size(); ++k) {
    out.coeffs[k] *= b.eigenvalues()[k];
  }
  return out;
}

SpectralField propagate_free(const BasisTable& b, const SpectralField& c, double t)
{
  require_basis(b, c.basis_id, "spectral field");
  if (!std::isfinite(t)) {
    throw Error(ErrorKind::Usage, "propagate_free: non-finite duration");
  }
  // Eigenvalues are the integers 2|nu| + n; one phase per distinct value.
  const int max_lambda = 2 * b.n() * b.params().K + b.n();
  std::vector<cplx> table(static_cast<std::size_t>(max_lambda) + 1);
  for (int l = 0; l <= max_lambda; ++l) {
    table[l] = cplx(std::cos(t * l), -std::sin(t * l));
  }
  std::vector<cplx> phase(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    phase[k] = table[static_cast<std::size_t>(b.eigenvalues()[k])];
  }
  SpectralField out = c;
  kernels::cmul(phase, c.coeffs, out.coeffs);
  return out;
}

GridField grid_apply_ladder(const BasisTable& b, const SpectralField& c, Ladder which)
{
  require_basis(b, c.basis_id, "spectral field");
  if (which.coord < 0 || which.coord >= b.n()) {
    throw Error(ErrorKind::Usage, "ladder coordinate out of range");
  }
  const std::span<const cplx> table = which.bar ? b.plane_zbar_values() : b.plane_z_values();
  const std::vector<cplx> table_t = transpose(table, b.plane_nodes(), b.plane_size());
  std::vector<std::span<const cplx>> tr(b.n(), b.plane_phi_transposed());
  std::vector<std::span<const cplx>> nm(b.n(), b.plane_phi());
  tr[which.coord] = table_t;
  nm[which.coord] = table;
  return GridField{synthesize_tables(b.plane_nodes(), b.plane_size(), b.n(), c.coeffs, tr, nm), b.id()};
}

double full_gram_residual(const BasisTable& b)
{
  double res = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const SpectralField back = analyze(b, synthesize(b, SpectralField::unit(b, k)));
    for (std::size_t r = 0; r < b.size(); ++r) {
      res = std::max(res, std::abs(back.coeffs[r] - (r == k ? 1.0 : 0.0)));
    }
  }
  return res;
}

}  // namespace tnls
