#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "tnls/basis.hpp"

namespace testing {

/// Basis tables are expensive; tests share one per (n, K).
const tnls::BasisTable& shared_basis(int n, int K);

/// Random coefficients on the whole truncated space (or only below the top shell).
tnls::SpectralField random_coeffs(const tnls::BasisTable& b, std::mt19937_64& rng, bool below_top = false);

double max_diff(const tnls::SpectralField& a, const tnls::SpectralField& c);
double max_diff(const tnls::GridField& a, const tnls::GridField& c);

}  // namespace testing
