#include "tnls/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tnls/basis_cache.hpp"
#include "tnls/error.hpp"
#include "tnls/norms.hpp"
#include "tnls/solver.hpp"
#include "tnls/verification.hpp"

namespace tnls {

using nlohmann::json;

std::string format_csv_number(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

CsvTable::CsvTable(std::string hash, std::vector<std::string> columns)
    : hash_(std::move(hash)), columns_(std::move(columns))
{
}

namespace {

std::string csv_quote(const std::string& s)
{
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace

void CsvTable::add(std::vector<Cell> row)
{
  if (row.size() != columns_.size()) {
    throw Error(ErrorKind::Usage, "csv row width does not match the header");
  }
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) {
      line += ',';
    }
    line += row[i].is_text ? csv_quote(row[i].text) : format_csv_number(row[i].number);
  }
  lines_.push_back(std::move(line));
}

std::string CsvTable::str() const
{
  std::string out = "# config_hash: " + hash_ + "\r\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    out += (i ? "," : "") + csv_quote(columns_[i]);
  }
  out += "\r\n";
  for (const std::string& l : lines_) {
    out += l + "\r\n";
  }
  return out;
}

SpectralField initial_datum(const BasisTable& b, const RunConfig& cfg)
{
  SpectralField f = SpectralField::zeros(b);
  const std::string& kind = cfg.initial.kind;
  if (kind == "gaussian") {
    f.coeffs[0] = 1.0;
  } else if (kind == "peaked") {
    // Radial profiles Phi_{kk} in every plane: concentrated near the origin.
    const int K = b.params().K;
    const int top = std::max(0, K - 1);
    for (int k = 0; k <= top; ++k) {
      std::vector<int> idx(static_cast<std::size_t>(b.n()), k);
      f.coeffs[b.index(idx, idx)] = 1.0;
    }
  } else {
    RandomFieldSpec rs;
    rs.seed = cfg.seed;
    rs.decay = cfg.initial.decay;
    rs.amp_min = rs.amp_max = 1.0;
    std::mt19937_64 rng(cfg.seed);
    f = random_field(b, rng, rs);
  }
  const double norm = charge(f);
  for (cplx& c : f.coeffs) {
    c *= cfg.initial.amplitude / norm;
  }
  return f;
}

namespace {

struct Artifacts {
  explicit Artifacts(const RunConfig& c) : cfg(c) {}

  const RunConfig& cfg;
  json results = json::object();
  json solver = json::object();  // iterations, contraction factors, warnings
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> report;
  std::vector<AssertionResult> assertions;

  CsvTable table(std::vector<std::string> columns) const { return CsvTable(cfg.hash_hex(), std::move(columns)); }
  void csv(const std::string& name, const CsvTable& t) { files.emplace_back(name, t.str()); }
  void line(const std::string& s) { report.push_back(s); }
  void check(const std::string& name, double value, const std::optional<double>& limit, bool extra = true)
  {
    if (!limit) {
      return;
    }
    assertions.push_back({name, value, *limit, extra && value <= *limit});
  }
};

std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json meta_json(const TraceMeta& m)
{
  return {{"m", m.m},
          {"scheme", m.scheme},
          {"iterations", m.iterations},
          {"contraction_factors", m.contraction_factors},
          {"residuals", m.residuals},
          {"warnings", m.warnings},
          {"overflow", m.overflow}};
}

CsvTable trace_table(const Artifacts& a, const SolutionTrace& tr)
{
  CsvTable t = a.table({"t", "charge", "energy", "l2", "sobolev_2", "sobolev_rho"});
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const TraceDiagnostics& d = tr.diagnostics[k];
    t.add({tr.times[k], d.charge, d.energy, d.l2, d.sobolev_2, d.sobolev_rho});
  }
  return t;
}

SolverConfig horizon(const BasisTable& b, const SpectralField& f, const RunConfig& cfg, Artifacts& a)
{
  SolverConfig sc = cfg.solver;
  if (cfg.select.enabled) {
    std::vector<double> cands;
    const double pi = std::acos(-1.0);
    const int count = cfg.select.count;
    for (int i = 0; i < count; ++i) {
      const double s = count > 1 ? static_cast<double>(i) / (count - 1) : 0.0;
      cands.push_back(cfg.select.min_T * std::pow(pi / cfg.select.min_T, s));
    }
    sc.T = select_T(b, f, sc.delta, cands);
    a.results["selected_T"] = sc.T;
    a.line("selected T = " + fmt(sc.T) + " for delta = " + fmt(sc.delta));
  }
  return sc;
}

void run_simulate(const BasisTable& b, const RunConfig& cfg, Artifacts& a, bool conserve)
{
  const SpectralField f = initial_datum(b, cfg);
  const SolverConfig sc = horizon(b, f, cfg, a);
  SolutionTrace tr = solve(b, f, cfg.nonlinearity, sc);
  compute_diagnostics(b, tr, cfg.nonlinearity);
  a.solver = meta_json(tr.meta);
  a.csv("trace.csv", trace_table(a, tr));
  a.line("scheme " + tr.meta.scheme + ", " + std::to_string(tr.size() - 1) + " steps, T = " + fmt(sc.T));
  if (tr.meta.iterations > 0) {
    a.line("picard iterations: " + std::to_string(tr.meta.iterations));
  }
  if (b.n() >= 2) {
    const AdmissiblePair cp = canonical_pair(b.n());
    const MixedNormReport mn = mixed_norm(b, tr, cp.q, cp.p);
    a.results["strichartz_norm"] = to_json(mn);
    a.line("||u||_{L^" + cp.q.str() + " W^{1," + cp.p.str() + "}} = " + fmt(mn.value));
  }
  const ConservationReport cr = conservation_report(tr);
  a.results["max_charge_drift"] = cr.max_charge_drift;
  a.results["max_energy_drift"] = cr.max_energy_drift;
  a.results["max_energy_m_drift"] = cr.max_energy_m_drift;
  a.line("max relative charge drift " + fmt(cr.max_charge_drift));
  a.line("max relative energy drift " + fmt(cr.max_energy_drift) + " (truncated density " +
         fmt(cr.max_energy_m_drift) + ")");
  if (conserve) {
    CsvTable t = a.table({"t", "charge_drift", "energy_drift", "energy_m_drift"});
    for (std::size_t k = 0; k < cr.times.size(); ++k) {
      t.add({cr.times[k], cr.charge_drift[k], cr.energy_drift[k], cr.energy_m_drift[k]});
    }
    a.csv("conservation.csv", t);
  }
  a.check("charge_drift", cr.max_charge_drift, cfg.asserts.charge_drift);
  // The truncated flow conserves the functional built from its own density.
  a.check("energy_drift", cfg.nonlinearity.m > 0 ? cr.max_energy_m_drift : cr.max_energy_drift,
          cfg.asserts.energy_drift);
}

void run_truncation(const BasisTable& b, const RunConfig& cfg, Artifacts& a)
{
  const SpectralField f = initial_datum(b, cfg);
  const SolverConfig sc = horizon(b, f, cfg, a);
  const LimitResult lr = limit_solution(b, f, cfg.nonlinearity, sc, cfg.m_schedule);
  if (lr.table.empty() && lr.failure_kind) {
    throw Error(*lr.failure_kind, lr.failure);
  }
  CsvTable t = a.table({"m", "m_next", "gap"});
  std::vector<double> ms, gaps;
  bool decreasing = true;
  for (std::size_t i = 0; i < lr.table.size(); ++i) {
    const GapRow& r = lr.table[i];
    t.add({r.m, r.m_next, r.gap});
    if (r.gap > 0) {
      ms.push_back(r.m);
      gaps.push_back(r.gap);
    }
    if (i > 0 && !(r.gap < lr.table[i - 1].gap)) {
      decreasing = false;
    }
    a.line("m = " + std::to_string(r.m) + " -> " + std::to_string(r.m_next) + ": gap " + fmt(r.gap));
  }
  a.csv("gaps.csv", t);
  const double slope = ms.size() >= 2 ? loglog_slope(ms, gaps) : NAN;
  a.results["slope"] = std::isfinite(slope) ? json(slope) : json(nullptr);
  a.results["strictly_decreasing"] = decreasing;
  a.results["complete"] = lr.complete;
  if (!lr.complete) {
    a.results["failure"] = {{"kind", lr.failure_kind ? to_string(*lr.failure_kind) : "unknown"},
                            {"message", lr.failure}};
    a.line("schedule stopped early: " + lr.failure);
  }
  json traces = json::array();
  for (const SolutionTrace& tr : lr.traces) {
    traces.push_back(meta_json(tr.meta));
  }
  a.solver = {{"per_m", traces}};
  a.line("fitted log-log slope " + (std::isfinite(slope) ? fmt(slope) : std::string("n/a")));
  a.check("truncation_slope", std::isfinite(slope) ? slope : HUGE_VAL, cfg.asserts.truncation_slope, decreasing);
}

void add_estimate(Artifacts& a, CsvTable& summary, CsvTable& samples, const EstimateReport& r)
{
  summary.add({r.lemma_id, r.sample_count, r.skipped, r.fitted_constant, r.violation_count, r.overflow ? 1 : 0});
  for (std::size_t i = 0; i < r.ratios.size(); ++i) {
    samples.add({r.lemma_id, static_cast<int>(i), r.parameter[i], r.lhs[i], r.ratios[i]});
  }
  a.results["reports"].push_back(to_json(r));
  std::string extras;
  for (const auto& [k, v] : r.extras) {
    extras += ", " + k + " " + fmt(v);
  }
  a.line(r.lemma_id + ": C = " + fmt(r.fitted_constant) + " over " + std::to_string(r.sample_count) +
         " samples" + extras);
}

void run_verify(const BasisTable& b, const RunConfig& cfg, Artifacts& a)
{
  RandomFieldSpec rs;
  rs.seed = cfg.seed;
  rs.amp_min = cfg.verify.amp_min;
  rs.amp_max = cfg.verify.amp_max;
  rs.decay = cfg.verify.decay;
  rs.count = cfg.verify.samples;
  const SpaceTimeGrid grid{cfg.verify.length, cfg.verify.steps};
  a.results["reports"] = json::array();
  CsvTable summary = a.table({"estimate", "sample_count", "skipped", "fitted_constant", "violations", "overflow"});
  CsvTable samples = a.table({"estimate", "sample", "parameter", "lhs", "ratio"});
  add_estimate(a, summary, samples,
               verify_embedding(b, rs, Rational::parse(cfg.verify.p1), Rational::parse(cfg.verify.p2)));
  add_estimate(a, summary, samples, verify_difference_estimate(b, rs, cfg.nonlinearity, cfg.m_schedule, grid));
  add_estimate(a, summary, samples, verify_truncation_gap_batch(b, rs, cfg.nonlinearity, cfg.m_schedule, grid));
  for (const EstimateReport& r : verify_derivative_bound(b, rs, cfg.nonlinearity, cfg.m_schedule, grid)) {
    add_estimate(a, summary, samples, r);
  }
  a.csv("estimates.csv", summary);
  a.csv("estimate_samples.csv", samples);
}

void run_stability(const BasisTable& b, const RunConfig& cfg, Artifacts& a)
{
  const SpectralField f = initial_datum(b, cfg);
  RandomFieldSpec rs;
  rs.seed = cfg.seed + 1;
  rs.amp_min = rs.amp_max = 1.0;
  std::mt19937_64 rng(rs.seed);
  const SpectralField dir = random_field(b, rng, rs);
  const SolverConfig sc = horizon(b, f, cfg, a);
  const StabilityTable st = stability_experiment(b, f, dir, cfg.epsilon_list, cfg.nonlinearity, sc);
  CsvTable t = a.table({"epsilon", "data_distance", "distance_canonical", "distance_energy", "ratio", "failed"});
  json rows = json::array();
  for (const StabilityRow& r : st.rows) {
    t.add({r.epsilon, r.data_distance, r.distance_canonical, r.distance_energy, r.ratio, r.failed ? 1 : 0});
    rows.push_back({{"epsilon", r.epsilon}, {"distance_canonical", r.distance_canonical}, {"error", r.error}});
    a.line("epsilon " + fmt(r.epsilon) + ": distance " + fmt(r.distance_canonical) + ", ratio " + fmt(r.ratio) +
           (r.failed ? " (failed: " + r.error + ")" : ""));
  }
  a.csv("stability.csv", t);
  a.results["rows"] = rows;
  a.results["monotone"] = st.monotone;
  a.results["ratio_spread"] = st.ratio_spread;
  a.line(std::string("monotone: ") + (st.monotone ? "yes" : "no") + ", ratio spread " + fmt(st.ratio_spread));
  a.check("stability_spread", st.ratio_spread, cfg.asserts.stability_spread, st.monotone);
}

void run_blowup(const BasisTable& b, const RunConfig& cfg, Artifacts& a)
{
  const SpectralField f = initial_datum(b, cfg);
  AdmissiblePair pair = canonical_pair(b.n());
  if (!cfg.blowup.q.empty()) {
    pair = {Rational::parse(cfg.blowup.q), Rational::parse(cfg.blowup.p)};
  }
  const BlowupTrace bt = blowup_monitor(b, f, cfg.nonlinearity, cfg.solver, pair, cfg.blowup.threshold);
  CsvTable t = a.table({"t", "running_norm"});
  for (std::size_t k = 0; k < bt.times.size(); ++k) {
    t.add({bt.times[k], bt.running_norm[k]});
  }
  a.csv("blowup.csv", t);
  a.results["q"] = pair.q.str();
  a.results["p"] = pair.p.str();
  a.results["growth"] = bt.growth;
  a.results["diverged"] = bt.diverged;
  a.results["message"] = bt.message;
  a.results["final_norm"] = bt.running_norm.empty() ? 0.0 : bt.running_norm.back();
  a.line("pair (" + pair.q.str() + ", " + pair.p.str() + "), final running norm " +
         fmt(bt.running_norm.empty() ? 0.0 : bt.running_norm.back()));
  a.line(std::string("growth flag: ") + (bt.growth ? "set" : "clear") + (bt.diverged ? ", solver diverged" : ""));
}

void run_basis_check(const BasisTable& b, const RunConfig& cfg, Artifacts& a)
{
  const BasisReport& r = b.report();
  const double full = full_gram_residual(b);
  CsvTable t = a.table({"metric", "value"});
  const std::pair<const char*, double> rows[] = {
      {"orthonormality_residual", r.orthonormality_residual},
      {"full_gram_residual", full},
      {"hermite_gram_residual", r.hermite_gram_residual},
      {"eigenvalue_residual", r.eigenvalue_residual},
      {"angular_residual", r.angular_residual},
      {"ladder_composition_residual", r.ladder_composition_residual},
      {"commutator_residual", r.commutator_residual},
      {"ladder_max_column_count", static_cast<double>(r.ladder_max_column_count)},
  };
  for (const auto& [name, v] : rows) {
    t.add({name, v});
    a.results[name] = v;
    a.line(std::string(name) + " " + fmt(v));
  }
  a.results["size"] = b.size();
  a.results["node_count"] = b.node_count();
  a.csv("basis.csv", t);
  a.check("orthonormality", std::max(r.orthonormality_residual, full), cfg.asserts.orthonormality);
}

std::string timestamp()
{
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& body)
{
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << body;
  if (!os) {
    throw Error(ErrorKind::Io, "cannot write " + p.string());
  }
}

json config_json(const RunConfig& cfg)
{
  json j = json::object();
  std::istringstream is(cfg.canonical_text());
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

}  // namespace

RunOutcome run_experiment(const RunConfig& cfg, std::ostream& log)
{
  RunOutcome out;
  const std::filesystem::path dir(cfg.output_dir);
  json head = {{"config_hash", cfg.hash_hex()},
               {"seed", cfg.seed},
               {"version", kArtifactVersion},
               {"experiment", to_string(cfg.experiment)},
               {"config", config_json(cfg)}};
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::exception& e) {
    out.exit_code = 5;
    out.error = e.what();
    log << "error: " << e.what() << "\n";
    return out;
  }

  Artifacts a(cfg);
  const auto start = std::chrono::steady_clock::now();
  try {
    const BasisTable b = cached_basis(cfg.model, cfg.basis);
    switch (cfg.experiment) {
      case Experiment::Simulate: run_simulate(b, cfg, a, false); break;
      case Experiment::Conserve: run_simulate(b, cfg, a, true); break;
      case Experiment::TruncationStudy: run_truncation(b, cfg, a); break;
      case Experiment::VerifyEstimates: run_verify(b, cfg, a); break;
      case Experiment::Stability: run_stability(b, cfg, a); break;
      case Experiment::Blowup: run_blowup(b, cfg, a); break;
      case Experiment::BasisCheck: run_basis_check(b, cfg, a); break;
    }
  } catch (const std::exception& e) {
    json err = head;
    json detail = {{"message", e.what()}};
    if (const auto* te = dynamic_cast<const Error*>(&e)) {
      detail["kind"] = to_string(te->kind());
    } else {
      detail["kind"] = "internal";
    }
    if (const auto* se = dynamic_cast<const SolveError*>(&e)) {
      detail["residuals"] = se->residuals();
    }
    err["error"] = detail;
    out.exit_code = 5;
    out.error = e.what();
    try {
      write_file(dir / "error.json", err.dump(2) + "\n");
      out.files.push_back("error.json");
    } catch (const std::exception&) {
    }
    log << err["error"].dump() << "\n";
    return out;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json summary = head;
  summary["results"] = a.results;
  if (!a.solver.empty()) {
    summary["iterations"] = a.solver.value("iterations", 0);
    summary["contraction_factors"] = a.solver.value("contraction_factors", json::array());
    summary["warnings"] = a.solver.value("warnings", json::array());
    summary["solver"] = a.solver;
  }
  json asserts = json::array();
  bool all_pass = true;
  for (const AssertionResult& r : a.assertions) {
    asserts.push_back({{"name", r.name}, {"value", r.value}, {"limit", r.limit}, {"passed", r.passed}});
    all_pass = all_pass && r.passed;
  }
  summary["assertions"] = asserts;
  summary["metadata"] = {{"timestamp", timestamp()}, {"wall_seconds", seconds}};

  std::string report = std::string(kArtifactVersion) + "\nexperiment: " + to_string(cfg.experiment) +
                       "\nconfig_hash: " + cfg.hash_hex() + "\nseed: " + std::to_string(cfg.seed) + "\n\n";
  for (const std::string& l : a.report) {
    report += l + "\n";
  }
  if (!a.assertions.empty()) {
    report += "\n";
  }
  for (const AssertionResult& r : a.assertions) {
    report += std::string(r.passed ? "PASS " : "FAIL ") + r.name + ": " + fmt(r.value) + " (limit " +
              fmt(r.limit) + ")\n";
  }

  try {
    for (const auto& [name, body] : a.files) {
      write_file(dir / name, body);
      out.files.push_back(name);
    }
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    write_file(dir / "report.txt", report);
    out.files.push_back("summary.json");
    out.files.push_back("report.txt");
  } catch (const std::exception& e) {
    out.exit_code = 5;
    out.error = e.what();
    log << "error: " << e.what() << "\n";
    return out;
  }

  log << report;
  out.assertions = a.assertions;
  out.exit_code = all_pass ? 0 : 1;
  if (!all_pass) {
    for (const AssertionResult& r : a.assertions) {
      if (!r.passed) {
        log << "assertion failed: " << r.name << "\n";
      }
    }
  }
  return out;
}

}  // namespace tnls
