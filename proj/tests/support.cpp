#include "support.hpp"

#include <map>
#include <memory>

namespace testing {

const tnls::BasisTable& shared_basis(int n, int K)
{
  static std::map<std::pair<int, int>, std::unique_ptr<tnls::BasisTable>> cache;
  auto& slot = cache[{n, K}];
  if (!slot) {
    slot = std::make_unique<tnls::BasisTable>(tnls::ModelParams{n, K, 2 * K + 2}, tnls::BasisTolerances{});
  }
  return *slot;
}

tnls::SpectralField random_coeffs(const tnls::BasisTable& b, std::mt19937_64& rng, bool below_top)
{
  std::normal_distribution<double> g;
  tnls::SpectralField f = tnls::SpectralField::zeros(b);
  const int K = b.params().K;
  for (std::size_t k = 0; k < b.size(); ++k) {
    bool top = false;
    for (int j = 0; j < b.n(); ++j) {
      top = top || b.nu(k, j) == K;
    }
    const double re = g(rng);
    const double im = g(rng);
    if (!(below_top && top)) {
      f.coeffs[k] = {re, im};
    }
  }
  return f;
}

double max_diff(const tnls::SpectralField& a, const tnls::SpectralField& c)
{
  double m = 0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    m = std::max(m, std::abs(a.coeffs[i] - c.coeffs[i]));
  }
  return m;
}

double max_diff(const tnls::GridField& a, const tnls::GridField& c)
{
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - c.values[i]));
  }
  return m;
}

}  // namespace testing
