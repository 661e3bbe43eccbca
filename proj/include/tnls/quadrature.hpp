#pragma once

#include <vector>

namespace tnls {

/// Gauss-Hermite rule for the weight exp(-t^2).
struct GaussHermite {
  std::vector<double> nodes;   // ascending
  std::vector<double> weights;
};

GaussHermite gauss_hermite(int order);

/// Nodes and weights on the real line that integrate f(x) dx (flat measure)
/// for f = polynomial * exp(-x^2/2).  Nodes are sqrt(2) * t_k, weights are the
/// Gauss-Hermite weights compensated by exp(t_k^2).
struct FlatRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

FlatRule compensated_hermite_rule(int order);

/// Orthonormal Hermite functions scaled to the oscillator -d^2/dx^2 + x^2/4:
/// psi_i(x) = 2^{-1/4} h_i(x / sqrt 2), so psi_0 ~ exp(-x^2/4).
/// Returns psi_0..psi_max at x.
std::vector<double> scaled_hermite_functions(int max_degree, double x);

/// Exact derivatives of the same functions, from the ladder recurrence.
std::vector<double> scaled_hermite_derivatives(int max_degree, double x);

}  // namespace tnls
