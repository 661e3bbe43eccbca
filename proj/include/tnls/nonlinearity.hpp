#pragma once

#include <functional>
#include <span>

#include "tnls/basis.hpp"

namespace tnls {

enum class NonlinearityForm { Power, Plugin };

/// User-supplied psi(z, sigma); `point` holds (x_1, y_1, ..., x_n, y_n) and
/// may be empty when the caller evaluates a z-independent profile.
using PsiFunction = std::function<double(std::span<const double> point, double sigma)>;

/// G(z, w) = psi(z, |w|) w.  Power form: psi = lambda * sigma^alpha.
/// m = 0 means untruncated; m >= 1 selects the truncated psi_m.
struct NonlinearitySpec {
  double lambda = 1.0;
  double alpha = 2.0;
  int m = 0;
  NonlinearityForm form = NonlinearityForm::Power;
  PsiFunction plugin;

  void validate() const;
  NonlinearitySpec with_m(int level) const;
};

/// 2 / (n - 1); UnsupportedRegime for n = 1.
double critical_alpha(int n);

double psi(double sigma, const NonlinearitySpec& spec, std::span<const double> point = {});
double psi_m(double sigma, const NonlinearitySpec& spec, std::span<const double> point = {});
/// d psi_m / d sigma (closed form for the power law, central differences for plugins).
double psi_m_derivative(double sigma, const NonlinearitySpec& spec, std::span<const double> point = {});
/// Energy density: integral of s * psi_m(s) over [0, sigma].
double gtilde(double sigma, const NonlinearitySpec& spec, std::span<const double> point = {});

/// psi_m(|u|) at every node.
std::vector<double> psi_m_field(const BasisTable& b, const GridField& u, const NonlinearitySpec& spec);
/// psi_m(|u|) u at every node.
GridField eval_G_m(const BasisTable& b, const GridField& u, const NonlinearitySpec& spec);
/// Sum of weights * gtilde(|u|).
double potential_energy(const BasisTable& b, const GridField& u, const NonlinearitySpec& spec);

}  // namespace tnls
