#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tnls/basis.hpp"
#include "tnls/nonlinearity.hpp"
#include "tnls/solver.hpp"

namespace tnls {

enum class Experiment { Simulate, TruncationStudy, VerifyEstimates, Conserve, Stability, Blowup, BasisCheck };

const char* to_string(Experiment e);
/// Experiments built on the critical exponent (they need n >= 2).
bool is_critical(Experiment e);

struct InitialSpec {
  std::string kind = "gaussian";  // gaussian | random | peaked
  double amplitude = 0.5;         // L2 norm of the datum
  double decay = 2.0;             // random kind only
};

struct VerifySpec {
  int samples = 40;
  double amp_min = 0.1;
  double amp_max = 10.0;
  double decay = 2.0;
  std::string p1 = "2";
  std::string p2 = "8/3";
  double length = 0.5;
  int steps = 16;
};

struct BlowupSpec {
  std::string q;  // empty: the distinguished pair
  std::string p;
  double threshold = 100.0;
};

struct SelectSpec {
  bool enabled = false;
  double min_T = 1e-3;
  int count = 24;  // geometric candidate grid between min_T and pi
};

/// Optional run assertions; unset entries are not checked.
struct Assertions {
  std::optional<double> orthonormality;
  std::optional<double> charge_drift;
  std::optional<double> energy_drift;
  std::optional<double> truncation_slope;
  std::optional<double> stability_spread;
};

struct RunConfig {
  ModelParams model;
  BasisTolerances basis;
  NonlinearitySpec nonlinearity;
  SolverConfig solver;
  Experiment experiment = Experiment::Simulate;
  std::string output_dir = "out";
  std::uint64_t seed = 20240601;
  InitialSpec initial;
  std::vector<int> m_schedule{1, 2, 4, 8, 16};
  std::vector<double> epsilon_list{1e-1, 1e-2, 1e-3};
  VerifySpec verify;
  BlowupSpec blowup;
  SelectSpec select;
  Assertions asserts;

  /// Every key with its resolved value, one "key = value" per line, sorted.
  std::string canonical_text() const;
  /// FNV-1a 64 of canonical_text().
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

/// Error kinds: Io (missing file), Configuration (schema), UnsupportedRegime.
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);
/// Documented defaults in the config syntax.
std::string default_config_text();

/// Exit code for a failure of the given kind.
int exit_code_for(ErrorKind kind);

}  // namespace tnls
