#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnls/basis.hpp"
#include "tnls/nonlinearity.hpp"
#include "tnls/norms.hpp"
#include "tnls/solver.hpp"

namespace tnls {

/// Empirical inequality lhs <= C * prod(rhs_structure).  The fitted constant
/// is the largest observed ratio.
struct EstimateReport {
  std::string lemma_id;
  int sample_count = 0;
  int skipped = 0;
  std::vector<double> lhs;
  std::vector<std::vector<double>> rhs_structure;
  std::vector<double> ratios;
  std::vector<double> parameter;  // m (or another sweep variable) per sample
  double fitted_constant = 0;
  int violation_count = 0;
  bool overflow = false;
  std::map<std::string, double> extras;
  std::vector<std::string> notes;

  /// Appends one sample; ratio = lhs / prod(rhs).
  void add(double lhs_value, std::vector<double> rhs, double param = 0.0);
  /// Recomputes fitted_constant and violation_count.
  void finalize();
  /// Largest ratio among samples with the given parameter value.
  double fitted_for(double param) const;
};

nlohmann::json to_json(const EstimateReport& r);

/// Complex Gaussian coefficients with |c_{mu nu}| ~ (1 + |mu| + |nu|)^(-decay),
/// rescaled to an L2 norm drawn log-uniformly from [amp_min, amp_max].
struct RandomFieldSpec {
  std::uint64_t seed = 20240601;
  double amp_min = 0.1;
  double amp_max = 1.0;
  double decay = 2.0;
  int count = 50;
  bool in_range = true;  // keep nu_j <= K - 1 so ladder steps stay inside the cutoff
};

std::vector<SpectralField> random_fields(const BasisTable& b, const RandomFieldSpec& spec);
SpectralField random_field(const BasisTable& b, std::mt19937_64& rng, const RandomFieldSpec& spec);

/// Space-time samples used by the mixed-norm verifiers.
struct SpaceTimeGrid {
  double length = 0.5;
  int steps = 16;  // even
};

/// Range check for W^{1,p1} into L^{p2} (exact arithmetic).  Throws
/// Precondition naming the violated branch.
void check_embedding_range(const Rational& p1, const Rational& p2, int n);

EstimateReport verify_embedding(const BasisTable& b, const RandomFieldSpec& specs, const Rational& p1,
                                const Rational& p2);

/// ||G_m(u) - G_m(v)||_{L^gamma'(L^rho')} against
/// ||u - v||_{L^gamma(L^rho)} (||u|| + ||v||)^{2/(n-1)}_{L^gamma(W^{1,rho})}.
EstimateReport verify_difference_estimate(const BasisTable& b, const RandomFieldSpec& specs,
                                          const NonlinearitySpec& spec, const std::vector<int>& m_list,
                                          const SpaceTimeGrid& grid = {});

/// Truncation gap ||G_m(u) - G(u)||_{L^gamma'(L^rho')} of one trace against
/// |I|^{(n-1)/2n} m^{-1/(n(n-1))} ||u||^{(n^2-n+1)/(n(n-1))}_{L^inf(W^{1,2})} ||u||^{2/(n-1)}_{L^gamma(W^{1,rho})}.
/// extras: "slope" (least-squares log-log slope of gap vs m over nonzero gaps).
EstimateReport verify_truncation_gap(const BasisTable& b, const SolutionTrace& u, const NonlinearitySpec& spec,
                                     const std::vector<int>& m_list);
/// Same over many random free-flow traces; extras "slope" is the median slope.
EstimateReport verify_truncation_gap_batch(const BasisTable& b, const RandomFieldSpec& specs,
                                           const NonlinearitySpec& spec, const std::vector<int>& m_list,
                                           const SpaceTimeGrid& grid = {});

/// S G_m(u) on the grid for S = Id (which.coord < 0), Z_j or Zbar_j, by the
/// chain rule; nodes with |u| < 1e-8 contribute psi_m(|u|) S u only.
GridField apply_S_to_G_m(const BasisTable& b, const SpectralField& u, const NonlinearitySpec& spec, Ladder which,
                         bool identity);

/// One report per S in {Id, Z_1, Zbar_1, ..., Z_n, Zbar_n}:
/// ||S G_m(u)||_{L^gamma'(L^rho')} against ||u||^{(n+1)/(n-1)}_{L^gamma(W^{1,rho})}.
std::vector<EstimateReport> verify_derivative_bound(const BasisTable& b, const RandomFieldSpec& specs,
                                                    const NonlinearitySpec& spec, const std::vector<int>& m_list,
                                                    const SpaceTimeGrid& grid = {});

/// Free flow of f on [0, grid.length] (the smooth-in-time test fields).
SolutionTrace space_time_field(const BasisTable& b, const SpectralField& f, const SpaceTimeGrid& grid);

struct ConservationReport {
  std::vector<double> times;
  std::vector<double> charge_drift;    // relative
  std::vector<double> energy_drift;    // relative to max(1, |E(0)|)
  std::vector<double> energy_m_drift;
  double max_charge_drift = 0;
  double max_energy_drift = 0;
  double max_energy_m_drift = 0;
};

/// Needs trace.diagnostics (compute_diagnostics).
ConservationReport conservation_report(const SolutionTrace& trace);

struct StabilityRow {
  double epsilon = 0;
  double data_distance = 0;        // ||f - f_k||_{W^{1,2}}
  double distance_canonical = 0;   // ||u - u_k||_{L^gamma(W^{1,rho})}
  double distance_energy = 0;      // ||u - u_k||_{L^inf(W^{1,2})}
  double ratio = 0;                // distance_canonical / epsilon
  bool failed = false;
  std::string error;
};

struct StabilityTable {
  std::vector<StabilityRow> rows;
  bool monotone = true;
  double ratio_spread = 0;
};

StabilityTable stability_experiment(const BasisTable& b, const SpectralField& f, const SpectralField& direction,
                                    const std::vector<double>& epsilons, const NonlinearitySpec& spec,
                                    const SolverConfig& cfg);

struct BlowupTrace {
  std::vector<double> times;
  std::vector<double> running_norm;  // ||u||_{L^q((t0, t), W^{1,p})}, cumulative trapezoid
  bool growth = false;
  bool diverged = false;
  std::string message;
};

/// Running Strichartz-type norm of the solution for an admissible pair with p > 2.
BlowupTrace blowup_monitor(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec,
                           const SolverConfig& cfg, const AdmissiblePair& pair, double threshold);

/// Upper bound on delta from C (4 delta)^{2/(n-1)} < 1/2.
double delta_bound(double C, int n);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tnls
