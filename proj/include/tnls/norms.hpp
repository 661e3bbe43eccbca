#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>
#include "tnls/basis.hpp"
#include "tnls/nonlinearity.hpp"
#include "tnls/trace.hpp"

namespace tnls {

/// Exact exponent arithmetic.  den == 0 encodes +infinity.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);
  static Rational infinity();
  /// Parses "4", "8/3", "inf".
  static Rational parse(const std::string& text);

  bool is_infinite() const noexcept { return den_ == 0; }
  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double value() const;
  std::string str() const;
  /// 1/x with 1/0 = inf and 1/inf = 0.
  Rational reciprocal() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

struct AdmissiblePair {
  Rational q;
  Rational p;
};

/// Exact check of 1/q = n (1/2 - 1/p) with q in [2, inf], p in [2, 2n/(n-1)].
bool admissible(const Rational& q, const Rational& p, int n);
/// (gamma, rho) = (2n/(n-1), 2n^2/(n^2-n+1)); UnsupportedRegime for n < 2.
AdmissiblePair canonical_pair(int n);
/// Hoelder conjugate p' with 1/p + 1/p' = 1.
Rational conjugate(const Rational& p);

/// (sum weights |g|^p)^(1/p); p = inf gives max |g|.
double lp_norm(const BasisTable& b, const GridField& g, double p);

enum class LadderRoute { Spectral, Grid };

struct SobolevNorm {
  double value = 0;
  std::vector<double> components;  // ||f||, then ||Z_j f||, ||Zbar_j f|| for each j
  bool overflow = false;           // top-shell mass above 1e-8: Zbar_j leaves the cutoff
};

/// ||f||_p + sum_j (||Z_j f||_p + ||Zbar_j f||_p).
SobolevNorm sobolev_norm(const BasisTable& b, const SpectralField& c, double p,
                         LadderRoute route = LadderRoute::Spectral);

/// L^q norm in time of uniformly spaced samples: composite Simpson, with a
/// trapezoid on the last interval when the sample count is even.
double time_norm(std::span<const double> samples, double dt, double q);

enum class SpaceNorm { Lebesgue, Sobolev };

struct MixedNormReport {
  Rational q, p;
  double a = 0, b = 0;
  std::vector<double> samples;
  double value = 0;
  std::string rule;
  bool overflow = false;
};

MixedNormReport mixed_norm(const BasisTable& b, const SolutionTrace& trace, const Rational& q, const Rational& p,
                           SpaceNorm space = SpaceNorm::Sobolev);
/// Same composition for per-time grid fields (used by the verifiers).
MixedNormReport mixed_norm_grid(const BasisTable& b, std::span<const GridField> fields, double dt, const Rational& q,
                                const Rational& p);
nlohmann::json to_json(const MixedNormReport& r);

double charge(const SpectralField& c);
/// 1/2 sum lambda_k |c_k|^2.
double kinetic_energy(const BasisTable& b, const SpectralField& c);
/// 1/4 sum_j (||Z_j f||^2 + ||Zbar_j f||^2) with the grid ladder route, which
/// sees the part of Zbar_j f beyond the cutoff.
double kinetic_energy_ladder(const BasisTable& b, const SpectralField& c);
/// Kinetic plus sum of weights * gtilde(|f|) (spec.m selects the density).
double energy(const BasisTable& b, const SpectralField& c, const NonlinearitySpec& spec);

}  // namespace tnls
