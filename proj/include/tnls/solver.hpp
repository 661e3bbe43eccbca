#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tnls/basis.hpp"
#include "tnls/error.hpp"
#include "tnls/nonlinearity.hpp"
#include "tnls/norms.hpp"
#include "tnls/trace.hpp"

namespace tnls {

enum class Scheme { Picard, SplitStep };

const char* to_string(Scheme s);

struct SolverConfig {
  double t0 = 0.0;
  double T = 0.5;
  int n_steps = 100;
  double tol_fixed_point = 1e-10;
  int max_iter = 60;
  double delta = 0.1;
  Scheme scheme = Scheme::Picard;
  /// -1 solves on (t0 - T, t0] by running the same code with a negative step.
  int direction = 1;

  void validate() const;
  double step() const { return direction * T / n_steps; }
};

/// Fixed-point stopping norm: L^gamma(I, L^rho) for n >= 2, L^inf(I, L^2) for n = 1.
double iterate_distance(const BasisTable& b, std::span<const GridField> a, std::span<const GridField> c, double dt);

/// Free flow e^{-i(t - t0) L} f sampled on the configured grid.
SolutionTrace free_flow(const BasisTable& b, const SpectralField& f, const SolverConfig& cfg);

/// H_m(u): e^{-i(t-t0)L} f - i int_{t0}^t e^{-i(t-s)L} P G_m(u(s)) ds, with the
/// integral accumulated step by step by the trapezoid rule on the propagated
/// integrand.  P is the projection onto the truncated basis.
SolutionTrace duhamel_apply(const BasisTable& b, const SpectralField& f, const SolutionTrace& u,
                            const NonlinearitySpec& spec, const SolverConfig& cfg);

/// Banach iteration u^{j+1} = H_m(u^j) from the free flow.  Throws SolveError
/// (NonConvergence / Divergence) with the residual history.
SolutionTrace picard_solve(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec,
                           const SolverConfig& cfg);

/// Strang splitting: half nonlinear substep, exact free step, half nonlinear
/// substep.  The nonlinear substep integrates the projected equation
/// i c' = P psi_m(|u|) u (u the synthesis of c) with an exponential midpoint
/// rule; both exponentials are unitary, so the l2 norm is preserved.
SolutionTrace split_step_solve(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec,
                               const SolverConfig& cfg);

/// Dispatches on cfg.scheme.
SolutionTrace solve(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec,
                    const SolverConfig& cfg);

/// L^gamma(0, T; W^{1,rho}) norm of the free flow of f with `samples` + 1 samples.
double free_flow_norm(const BasisTable& b, const SpectralField& f, double T, int samples);

/// Largest T in the candidate list (entries above pi dropped, pi appended)
/// whose free-flow norm is <= delta.  Smallness error when none qualifies.
double select_T(const BasisTable& b, const SpectralField& f, double delta, std::vector<double> candidates,
                int samples = 64);

struct GapRow {
  int m = 0;
  int m_next = 0;
  double gap = 0;  // ||u_m - u_{m_next}|| in the fixed-point norm
};

struct LimitResult {
  SolutionTrace trace;               // largest m that succeeded
  std::vector<SolutionTrace> traces; // one per successful schedule entry
  std::vector<GapRow> table;
  bool complete = true;
  std::optional<ErrorKind> failure_kind;
  std::string failure;
};

LimitResult limit_solution(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec_base,
                           const SolverConfig& cfg, const std::vector<int>& m_schedule);

/// Distance between two traces on the same grid in the fixed-point norm.
double trace_distance(const BasisTable& b, const SolutionTrace& a, const SolutionTrace& c);
/// max_t ||a(t) - c(t)||_2.
double trace_distance_linf_l2(const SolutionTrace& a, const SolutionTrace& c);

/// Space exponent used for the sobolev_rho diagnostic: rho for n >= 2, 2 for n = 1.
double diagnostic_rho(int n);

/// Fills trace.diagnostics (charge, both energies, L2 and Sobolev norms).
void compute_diagnostics(const BasisTable& b, SolutionTrace& trace, const NonlinearitySpec& spec);

}  // namespace tnls
