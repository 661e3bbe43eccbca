#pragma once

#include <filesystem>

#include "tnls/basis.hpp"

namespace tnls {

/// On-disk layout, little-endian throughout:
///   "TNLS", u32 version, i32 n, i32 K, i32 grid_order, 4 tolerance doubles,
///   u64 G + axis nodes, u64 G + axis weights, u64 count + plane phi (re, im),
///   u64 count + eigenvalues, then for Z and Zbar of one plane:
///   u64 count + (u32 row, u32 col, re, im) triplets, followed by the plane
///   Z/Zbar value tables, the Hermite expansions and the basis report.
inline constexpr std::uint32_t kBasisCacheVersion = 1;

void save_basis(const BasisTable& b, const std::filesystem::path& file);

/// Loads a table and checks that it was built for (params, tol).  Throws Io
/// on a missing, truncated, foreign or mismatched file.
BasisTable load_basis(const std::filesystem::path& file, const ModelParams& params, const BasisTolerances& tol);

/// File name used inside the cache directory for (params, tol).
std::string basis_cache_name(const ModelParams& params, const BasisTolerances& tol);

/// Builds the basis, going through $TNLS_CACHE_DIR when it is set.  A cache
/// file that fails to load is rebuilt and overwritten.
BasisTable cached_basis(const ModelParams& params, const BasisTolerances& tol = {});

}  // namespace tnls
