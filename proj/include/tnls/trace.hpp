#pragma once

#include <string>
#include <vector>

#include "tnls/basis.hpp"

namespace tnls {

/// Per-sample diagnostics recorded by the solvers.
struct TraceDiagnostics {
  double charge = 0;
  double energy = 0;      // untruncated functional
  double energy_m = 0;    // functional with the truncated density
  double l2 = 0;
  double sobolev_2 = 0;
  double sobolev_rho = 0;
};

struct TraceMeta {
  int m = 0;
  std::string scheme;
  int iterations = 0;
  std::vector<double> contraction_factors;
  std::vector<double> residuals;
  std::vector<std::string> warnings;
  bool overflow = false;
};

/// Uniformly sampled solution u(t_k), k = 0..n_steps.
struct SolutionTrace {
  std::vector<double> times;
  std::vector<SpectralField> fields;
  std::vector<TraceDiagnostics> diagnostics;  // empty until computed
  TraceMeta meta;

  std::size_t size() const noexcept { return times.size(); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

}  // namespace tnls
