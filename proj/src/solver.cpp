#include "tnls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tnls/kernels.hpp"

namespace tnls {

namespace {

SolutionTrace empty_trace(const SolverConfig& cfg)
{
  SolutionTrace tr;
  tr.times.resize(static_cast<std::size_t>(cfg.n_steps) + 1);
  const double h = cfg.step();
  for (int k = 0; k <= cfg.n_steps; ++k) {
    tr.times[k] = cfg.t0 + k * h;
  }
  return tr;
}

std::vector<GridField> synthesize_all(const BasisTable& b, const SolutionTrace& u)
{
  std::vector<GridField> out;
  out.reserve(u.size());
  for (const SpectralField& f : u.fields) {
    out.push_back(synthesize(b, f));
  }
  return out;
}

SolutionTrace duhamel_from_grids(const BasisTable& b, const SpectralField& f, std::span<const GridField> grids,
                                 const NonlinearitySpec& spec, const SolverConfig& cfg)
{
  SolutionTrace out = empty_trace(cfg);
  const double h = cfg.step();
  const cplx minus_i(0.0, -1.0);
  SpectralField integral = SpectralField::zeros(b);
  SpectralField g_prev = analyze(b, eval_G_m(b, grids[0], spec));
  SpectralField free = f;
  out.fields.push_back(f);
  for (int k = 0; k < cfg.n_steps; ++k) {
    const SpectralField g_next = analyze(b, eval_G_m(b, grids[k + 1], spec));
    // I_{k+1} = E I_k + h/2 (E g_k + g_{k+1}),  E = exp(-i h L)
    kernels::caxpy(cplx(0.5 * h, 0.0), g_prev.coeffs, integral.coeffs);
    integral = propagate_free(b, integral, h);
    kernels::caxpy(cplx(0.5 * h, 0.0), g_next.coeffs, integral.coeffs);
    free = propagate_free(b, free, h);
    SpectralField u = free;
    kernels::caxpy(minus_i, integral.coeffs, u.coeffs);
    out.fields.push_back(std::move(u));
    g_prev = g_next;
  }
  return out;
}

// A(c) v = P (psi v) with psi frozen on the grid.
SpectralField apply_frozen(const BasisTable& b, const std::vector<double>& psi_grid, const SpectralField& v)
{
  GridField g = synthesize(b, v);
  kernels::rscale(psi_grid, g.values, g.values);
  return analyze(b, g);
}

// exp(-i tau A) v by substepped Taylor series; A is Hermitian with norm <= max|psi|.
SpectralField expv(const BasisTable& b, const std::vector<double>& psi_grid, double tau, const SpectralField& v)
{
  double bound = 0.0;
  for (double x : psi_grid) {
    bound = std::max(bound, std::abs(x));
  }
  const double reach = std::abs(tau) * bound;
  if (reach == 0.0) {
    return v;
  }
  const int sub = std::max(1, static_cast<int>(std::ceil(reach / 0.5)));
  const double ts = tau / sub;
  SpectralField cur = v;
  for (int s = 0; s < sub; ++s) {
    SpectralField sum = cur;
    SpectralField term = cur;
    const double base = charge(cur);
    for (int k = 1; k <= 60; ++k) {
      term = apply_frozen(b, psi_grid, term);
      const cplx factor(0.0, -ts / k);
      for (cplx& x : term.coeffs) {
        x *= factor;
      }
      kernels::caxpy(cplx(1.0, 0.0), term.coeffs, sum.coeffs);
      if (charge(term) <= 1e-17 * base) {
        break;
      }
    }
    cur = std::move(sum);
  }
  return cur;
}

// Exponential midpoint step for i c' = A(c) c over a duration tau.
SpectralField nonlinear_substep(const BasisTable& b, const SpectralField& c, const NonlinearitySpec& spec, double tau)
{
  const std::vector<double> psi0 = psi_m_field(b, synthesize(b, c), spec);
  const SpectralField half = expv(b, psi0, 0.5 * tau, c);
  const std::vector<double> psi_half = psi_m_field(b, synthesize(b, half), spec);
  return expv(b, psi_half, tau, c);
}

Rational gamma_of(int n)
{
  return n >= 2 ? canonical_pair(n).q : Rational::infinity();
}

Rational rho_of(int n)
{
  return n >= 2 ? canonical_pair(n).p : Rational(2);
}

}  // namespace

const char* to_string(Scheme s)
{
  return s == Scheme::Picard ? "picard" : "splitstep";
}

void SolverConfig::validate() const
{
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(ErrorKind::Configuration, "solver.T must be positive");
  }
  if (n_steps < 4 || n_steps % 2 != 0) {
    throw Error(ErrorKind::Configuration, "solver.n_steps must be even and >= 4");
  }
  if (!(tol_fixed_point > 0.0)) {
    throw Error(ErrorKind::Configuration, "solver.tol must be positive");
  }
  if (max_iter < 1) {
    throw Error(ErrorKind::Configuration, "solver.max_iter must be >= 1");
  }
  if (!(delta > 0.0)) {
    throw Error(ErrorKind::Configuration, "solver.delta must be positive");
  }
  if (direction != 1 && direction != -1) {
    throw Error(ErrorKind::Configuration, "solver.direction must be 1 or -1");
  }
}

double iterate_distance(const BasisTable& b, std::span<const GridField> a, std::span<const GridField> c, double dt)
{
  std::vector<double> samples(a.size());
  const double p = rho_of(b.n()).value();
  for (std::size_t k = 0; k < a.size(); ++k) {
    GridField d = a[k];
    kernels::caxpy(cplx(-1.0, 0.0), c[k].values, d.values);
    samples[k] = lp_norm(b, d, p);
  }
  return time_norm(samples, std::abs(dt), gamma_of(b.n()).value());
}

SolutionTrace free_flow(const BasisTable& b, const SpectralField& f, const SolverConfig& cfg)
{
  require_basis(b, f.basis_id, "initial datum");
  SolutionTrace tr = empty_trace(cfg);
  tr.fields.reserve(tr.size());
  for (double t : tr.times) {
    tr.fields.push_back(propagate_free(b, f, t - cfg.t0));
  }
  return tr;
}

SolutionTrace duhamel_apply(const BasisTable& b, const SpectralField& f, const SolutionTrace& u,
                            const NonlinearitySpec& spec, const SolverConfig& cfg)
{
  cfg.validate();
  require_basis(b, f.basis_id, "initial datum");
  if (u.size() != static_cast<std::size_t>(cfg.n_steps) + 1 || std::abs(u.times.front() - cfg.t0) > 1e-12 ||
      std::abs(u.dt() - cfg.step()) > 1e-12 * std::max(1.0, std::abs(cfg.step()))) {
    throw Error(ErrorKind::Usage, "duhamel_apply: trace is not sampled on the configured grid");
  }
  const std::vector<GridField> grids = synthesize_all(b, u);
  return duhamel_from_grids(b, f, grids, spec, cfg);
}

SolutionTrace picard_solve(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec,
                           const SolverConfig& cfg)
{
  cfg.validate();
  spec.validate();
  SolutionTrace u = free_flow(b, f, cfg);
  std::vector<GridField> grids = synthesize_all(b, u);
  std::vector<double> residuals, factors;
  int above_one = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    SolutionTrace next = duhamel_from_grids(b, f, grids, spec, cfg);
    std::vector<GridField> next_grids = synthesize_all(b, next);
    const double res = iterate_distance(b, next_grids, grids, cfg.step());
    const std::vector<GridField> zero(next_grids.size(), GridField::zeros(b));
    const double scale = iterate_distance(b, next_grids, zero, cfg.step());
    residuals.push_back(res);
    if (residuals.size() >= 2) {
      const double prev = residuals[residuals.size() - 2];
      const double factor = prev > 0.0 ? res / prev : 0.0;
      factors.push_back(factor);
      above_one = factor >= 1.0 ? above_one + 1 : 0;
    }
    u = std::move(next);
    grids = std::move(next_grids);
    if (res <= cfg.tol_fixed_point || res <= 1e-14 * scale) {
      u.meta.scheme = to_string(Scheme::Picard);
      u.meta.m = spec.m;
      u.meta.iterations = it;
      u.meta.residuals = residuals;
      u.meta.contraction_factors = factors;
      if (res > cfg.tol_fixed_point) {
        u.meta.warnings.push_back("stopped at the roundoff floor above the requested tolerance");
      }
      for (const SpectralField& c : u.fields) {
        if (has_top_shell_mass(b, c, 1e-8)) {
          u.meta.overflow = true;
          break;
        }
      }
      return u;
    }
    if (above_one >= 3) {
      std::ostringstream os;
      os << "Picard iteration diverges (contraction factor >= 1 for 3 iterations, last " << factors.back()
         << "); the horizon T is probably too large";
      throw SolveError(ErrorKind::Divergence, os.str(), residuals);
    }
  }
  std::ostringstream os;
  os << "Picard iteration did not reach tol " << cfg.tol_fixed_point << " in " << cfg.max_iter
     << " iterations (last residual " << residuals.back() << ")";
  throw SolveError(ErrorKind::NonConvergence, os.str(), residuals);
}

SolutionTrace split_step_solve(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec,
                               const SolverConfig& cfg)
{
  cfg.validate();
  spec.validate();
  require_basis(b, f.basis_id, "initial datum");
  SolutionTrace tr = empty_trace(cfg);
  const double h = cfg.step();
  SpectralField c = f;
  tr.fields.push_back(c);
  const bool linear = spec.form == NonlinearityForm::Power && spec.lambda == 0.0;
  for (int k = 0; k < cfg.n_steps; ++k) {
    if (!linear) {
      c = nonlinear_substep(b, c, spec, 0.5 * h);
    }
    c = propagate_free(b, c, h);
    if (!linear) {
      c = nonlinear_substep(b, c, spec, 0.5 * h);
    }
    tr.fields.push_back(c);
    if (has_top_shell_mass(b, c, 1e-8)) {
      tr.meta.overflow = true;
    }
  }
  tr.meta.scheme = to_string(Scheme::SplitStep);
  tr.meta.m = spec.m;
  tr.meta.iterations = 0;
  return tr;
}

SolutionTrace solve(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec,
                    const SolverConfig& cfg)
{
  return cfg.scheme == Scheme::Picard ? picard_solve(b, f, spec, cfg) : split_step_solve(b, f, spec, cfg);
}

double free_flow_norm(const BasisTable& b, const SpectralField& f, double T, int samples)
{
  if (samples < 2 || samples % 2 != 0) {
    throw Error(ErrorKind::Usage, "free_flow_norm: samples must be even and >= 2");
  }
  const AdmissiblePair pair = canonical_pair(b.n());
  std::vector<double> s(static_cast<std::size_t>(samples) + 1);
  const double dt = T / samples;
  for (int k = 0; k <= samples; ++k) {
    s[k] = sobolev_norm(b, propagate_free(b, f, k * dt), pair.p.value()).value;
  }
  return time_norm(s, dt, pair.q.value());
}

double select_T(const BasisTable& b, const SpectralField& f, double delta, std::vector<double> candidates,
                int samples)
{
  if (b.n() < 2) {
    throw Error(ErrorKind::UnsupportedRegime, "select_T needs n >= 2");
  }
  if (!(delta > 0.0)) {
    throw Error(ErrorKind::Usage, "select_T: delta must be positive");
  }
  std::erase_if(candidates, [](double t) { return !(t > 0.0) || t > std::numbers::pi; });
  candidates.push_back(std::numbers::pi);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  // The free-flow norm grows with T, so scan downwards.
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
    if (free_flow_norm(b, f, *it, samples) <= delta) {
      return *it;
    }
  }
  std::ostringstream os;
  os << "no horizon T >= " << candidates.front() << " keeps the free-flow norm below delta = " << delta;
  throw Error(ErrorKind::Smallness, os.str());
}

double trace_distance(const BasisTable& b, const SolutionTrace& a, const SolutionTrace& c)
{
  if (a.size() != c.size()) {
    throw Error(ErrorKind::Usage, "trace_distance: traces on different grids");
  }
  std::vector<GridField> da, dc;
  for (std::size_t k = 0; k < a.size(); ++k) {
    SpectralField d = a.fields[k];
    kernels::caxpy(cplx(-1.0, 0.0), c.fields[k].coeffs, d.coeffs);
    da.push_back(synthesize(b, d));
    dc.push_back(GridField::zeros(b));
  }
  return iterate_distance(b, da, dc, a.dt());
}

double trace_distance_linf_l2(const SolutionTrace& a, const SolutionTrace& c)
{
  if (a.size() != c.size()) {
    throw Error(ErrorKind::Usage, "trace_distance: traces on different grids");
  }
  double mx = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    SpectralField d = a.fields[k];
    kernels::caxpy(cplx(-1.0, 0.0), c.fields[k].coeffs, d.coeffs);
    mx = std::max(mx, charge(d));
  }
  return mx;
}

LimitResult limit_solution(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec_base,
                           const SolverConfig& cfg, const std::vector<int>& m_schedule)
{
  for (std::size_t i = 0; i < m_schedule.size(); ++i) {
    if (m_schedule[i] < 1 || (i > 0 && m_schedule[i] <= m_schedule[i - 1])) {
      throw Error(ErrorKind::Configuration, "m_schedule must be increasing positive integers");
    }
  }
  LimitResult r;
  for (int m : m_schedule) {
    try {
      r.traces.push_back(picard_solve(b, f, spec_base.with_m(m), cfg));
    } catch (const Error& e) {
      r.complete = false;
      r.failure_kind = e.kind();
      r.failure = "m = " + std::to_string(m) + ": " + e.what();
      break;
    }
    const std::size_t n = r.traces.size();
    if (n >= 2) {
      r.table.push_back({m_schedule[n - 2], m, trace_distance(b, r.traces[n - 2], r.traces[n - 1])});
    }
  }
  if (!r.traces.empty()) {
    r.trace = r.traces.back();
  }
  return r;
}

double diagnostic_rho(int n)
{
  return rho_of(n).value();
}

void compute_diagnostics(const BasisTable& b, SolutionTrace& trace, const NonlinearitySpec& spec)
{
  const NonlinearitySpec untruncated = spec.with_m(0);
  const double rho = diagnostic_rho(b.n());
  trace.diagnostics.clear();
  for (const SpectralField& c : trace.fields) {
    TraceDiagnostics d;
    const GridField g = synthesize(b, c);
    const double kin = kinetic_energy(b, c);
    d.charge = charge(c);
    d.energy = kin + potential_energy(b, g, untruncated);
    d.energy_m = kin + potential_energy(b, g, spec);
    d.l2 = lp_norm(b, g, 2.0);
    d.sobolev_2 = sobolev_norm(b, c, 2.0).value;
    d.sobolev_rho = sobolev_norm(b, c, rho).value;
    trace.diagnostics.push_back(d);
  }
}

}  // namespace tnls
