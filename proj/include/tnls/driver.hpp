#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tnls/basis.hpp"
#include "tnls/config.hpp"

namespace tnls {

inline constexpr const char* kArtifactVersion = "twisted-nls 0.1.0";

struct AssertionResult {
  std::string name;
  double value = 0;
  double limit = 0;
  bool passed = true;
};

struct RunOutcome {
  int exit_code = 0;
  std::vector<AssertionResult> assertions;
  std::vector<std::string> files;  // written artifacts, relative to output_dir
  std::string error;               // set when exit_code == 5
};

/// Initial datum of the configured kind with the configured L2 norm.
SpectralField initial_datum(const BasisTable& b, const RunConfig& cfg);

/// Runs the configured experiment and writes summary.json, the experiment
/// CSVs and report.txt into cfg.output_dir.  Exit codes: 0 all assertions
/// hold, 1 an assertion failed, 5 compute failure (error.json written).
RunOutcome run_experiment(const RunConfig& cfg, std::ostream& log);

/// CSV body with a "# config_hash:" line, RFC-4180 quoting and %.16e numbers.
class CsvTable {
 public:
  CsvTable(std::string hash, std::vector<std::string> columns);
  /// Each cell is either a number or a string; numbers use 17 significant digits.
  struct Cell {
    Cell(double v) : number(v) {}
    Cell(int v) : number(v) {}
    Cell(std::string v) : text(std::move(v)), is_text(true) {}
    Cell(const char* v) : text(v), is_text(true) {}
    double number = 0;
    std::string text;
    bool is_text = false;
  };
  void add(std::vector<Cell> row);
  std::string str() const;

 private:
  std::string hash_;
  std::vector<std::string> columns_;
  std::vector<std::string> lines_;
};

std::string format_csv_number(double v);

}  // namespace tnls
