#include "tnls/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tnls/error.hpp"
#include "tnls/norms.hpp"
#include "tnls/verification.hpp"

namespace tnls {

namespace {

enum class Type { Int, Real, Text, IntList, RealList, Flag };

struct KeyInfo {
  const char* name;
  Type type;
  const char* fallback;  // "" means unset unless given
  const char* doc;
};

// Keys in the order print-defaults shows them.
const KeyInfo kKeys[] = {
    {"experiment", Type::Text, "simulate",
     "simulate | truncation-study | verify-estimates | conserve | stability | blowup | basis-check"},
    {"output_dir", Type::Text, "out", "artifact directory"},
    {"seed", Type::Int, "20240601", "seed of every random draw"},
    {"model.n", Type::Int, "2", "complex dimension, 1 or 2"},
    {"model.K", Type::Int, "3", "cutoff on each special Hermite index"},
    {"model.grid_order", Type::Int, "", "Gauss-Hermite nodes per axis; default 2K + 2"},
    {"basis.orthonormality_tol", Type::Real, "1e-8", ""},
    {"basis.failure_tol", Type::Real, "1e-6", "Gram residual treated as a construction failure"},
    {"basis.ladder_threshold", Type::Real, "1e-10", ""},
    {"basis.fd_step", Type::Real, "1e-2", "step of the derivative stencil"},
    {"nonlinearity.lambda", Type::Real, "1", "negative: focusing"},
    {"nonlinearity.alpha", Type::Real, "", "default 2/(n-1); required when n = 1"},
    {"nonlinearity.m", Type::Int, "0", "truncation level, 0 = none"},
    {"solver.t0", Type::Real, "0", ""},
    {"solver.T", Type::Real, "0.5", ""},
    {"solver.n_steps", Type::Int, "100", "even, >= 4"},
    {"solver.tol", Type::Real, "1e-10", "Picard stopping tolerance"},
    {"solver.max_iter", Type::Int, "60", ""},
    {"solver.delta", Type::Real, "0.1", "smallness parameter"},
    {"solver.scheme", Type::Text, "picard", "picard | splitstep"},
    {"solver.direction", Type::Int, "1", "1 forward, -1 backward"},
    {"initial.kind", Type::Text, "gaussian", "gaussian | random | peaked"},
    {"initial.amplitude", Type::Real, "0.5", "L2 norm of the initial datum"},
    {"initial.decay", Type::Real, "2", "coefficient decay of the random kind"},
    {"truncation.m_schedule", Type::IntList, "[1, 2, 4, 8, 16]", "also the m list of verify-estimates"},
    {"stability.epsilon_list", Type::RealList, "[0.1, 0.01, 0.001]", ""},
    {"verify.samples", Type::Int, "40", ""},
    {"verify.amp_min", Type::Real, "0.1", ""},
    {"verify.amp_max", Type::Real, "10", ""},
    {"verify.decay", Type::Real, "2", ""},
    {"verify.p1", Type::Text, "2", "embedding source exponent"},
    {"verify.p2", Type::Text, "8/3", "embedding target exponent"},
    {"verify.length", Type::Real, "0.5", "time interval of the space-time fields"},
    {"verify.steps", Type::Int, "16", ""},
    {"blowup.q", Type::Text, "", "default: the distinguished pair"},
    {"blowup.p", Type::Text, "", ""},
    {"blowup.threshold", Type::Real, "100", ""},
    {"select.enabled", Type::Flag, "false", "choose T from delta before solving"},
    {"select.min_T", Type::Real, "1e-3", ""},
    {"select.count", Type::Int, "24", "geometric candidates between min_T and pi"},
    {"assert.orthonormality", Type::Real, "", "max Gram residual"},
    {"assert.charge_drift", Type::Real, "", "max relative charge drift"},
    {"assert.energy_drift", Type::Real, "", "max relative energy drift"},
    {"assert.truncation_slope", Type::Real, "", "max log-log slope of the gap table"},
    {"assert.stability_spread", Type::Real, "", "max spread of distance / epsilon"},
};

const KeyInfo* find_key(const std::string& name)
{
  for (const KeyInfo& k : kKeys) {
    if (name == k.name) {
      return &k;
    }
  }
  return nullptr;
}

[[noreturn]] void schema(const std::string& key, const std::string& msg)
{
  throw Error(ErrorKind::Configuration, key + ": " + msg);
}

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line)
{
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(const std::string& key, const std::string& v)
{
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return v.substr(1, v.size() - 2);
  }
  if (v.find('"') != std::string::npos) {
    schema(key, "unbalanced quotes");
  }
  return v;
}

long long to_int(const std::string& key, const std::string& v)
{
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    schema(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

double to_real(const std::string& key, const std::string& v)
{
  double out = 0;
  const char* first = v.data();
  if (!v.empty() && v[0] == '+') {
    ++first;
  }
  const auto r = std::from_chars(first, v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    schema(key, "expected a finite number, got '" + v + "'");
  }
  return out;
}

bool to_flag(const std::string& key, const std::string& v)
{
  if (v == "true") {
    return true;
  }
  if (v == "false") {
    return false;
  }
  schema(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& key, const std::string& v)
{
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    schema(key, "expected a list [a, b, ...]");
  }
  const std::string body = trim(v.substr(1, v.size() - 2));
  std::vector<std::string> items;
  if (body.empty()) {
    return items;
  }
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty() || item.find('[') != std::string::npos) {
      schema(key, "malformed list");
    }
    items.push_back(item);
  }
  return items;
}

Experiment parse_experiment(const std::string& v)
{
  for (Experiment e : {Experiment::Simulate, Experiment::TruncationStudy, Experiment::VerifyEstimates,
                       Experiment::Conserve, Experiment::Stability, Experiment::Blowup, Experiment::BasisCheck}) {
    if (v == to_string(e)) {
      return e;
    }
  }
  schema("experiment", "unknown experiment '" + v + "'");
}

std::string format_real(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using RawMap = std::map<std::string, std::string>;

RawMap read_raw(const std::string& text)
{
  RawMap raw;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') {
        schema("line " + std::to_string(lineno), "malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      schema("line " + std::to_string(lineno), "expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty()) {
      key = section + "." + key;
    }
    if (find_key(key) == nullptr) {
      schema(key, "unknown key");
    }
    if (value.empty()) {
      schema(key, "missing value");
    }
    if (!raw.emplace(key, value).second) {
      schema(key, "duplicate key");
    }
  }
  return raw;
}

RunConfig build(const RawMap& given)
{
  RunConfig c;
  auto value = [&](const char* key) -> std::optional<std::string> {
    const auto it = given.find(key);
    if (it != given.end()) {
      return it->second;
    }
    const KeyInfo* info = find_key(key);
    if (*info->fallback == '\0') {
      return std::nullopt;
    }
    return std::string(info->fallback);
  };
  auto get_int = [&](const char* key) { return to_int(key, *value(key)); };
  auto get_real = [&](const char* key) { return to_real(key, *value(key)); };
  auto get_text = [&](const char* key) { return unquote(key, *value(key)); };
  auto get_opt_real = [&](const char* key) -> std::optional<double> {
    const auto v = value(key);
    return v ? std::optional<double>(to_real(key, *v)) : std::nullopt;
  };
  auto narrow = [](const char* key, long long v) {
    if (v < -1000000000LL || v > 1000000000LL) {
      schema(key, "integer out of range");
    }
    return static_cast<int>(v);
  };

  c.experiment = parse_experiment(get_text("experiment"));
  c.output_dir = get_text("output_dir");
  const long long seed = get_int("seed");
  if (seed < 0) {
    schema("seed", "must be non-negative");
  }
  c.seed = static_cast<std::uint64_t>(seed);

  c.model.n = narrow("model.n", get_int("model.n"));
  c.model.K = narrow("model.K", get_int("model.K"));
  if (const auto g = value("model.grid_order")) {
    c.model.grid_order = narrow("model.grid_order", to_int("model.grid_order", *g));
  } else {
    c.model.grid_order = 2 * c.model.K + 2;
  }

  c.basis.orthonormality = get_real("basis.orthonormality_tol");
  c.basis.failure = get_real("basis.failure_tol");
  c.basis.ladder_threshold = get_real("basis.ladder_threshold");
  c.basis.fd_step = get_real("basis.fd_step");
  if (!(c.basis.orthonormality > 0) || !(c.basis.failure > 0) || !(c.basis.ladder_threshold > 0) ||
      !(c.basis.fd_step > 0)) {
    schema("basis", "tolerances must be positive");
  }

  c.nonlinearity.lambda = get_real("nonlinearity.lambda");
  c.nonlinearity.m = narrow("nonlinearity.m", get_int("nonlinearity.m"));
  if (const auto a = get_opt_real("nonlinearity.alpha")) {
    c.nonlinearity.alpha = *a;
  } else if (c.model.n >= 2) {
    c.nonlinearity.alpha = critical_alpha(c.model.n);
  } else if (c.model.n == 1) {
    schema("nonlinearity.alpha", "required when model.n = 1 (no critical exponent)");
  }

  c.solver.t0 = get_real("solver.t0");
  c.solver.T = get_real("solver.T");
  c.solver.n_steps = narrow("solver.n_steps", get_int("solver.n_steps"));
  c.solver.tol_fixed_point = get_real("solver.tol");
  c.solver.max_iter = narrow("solver.max_iter", get_int("solver.max_iter"));
  c.solver.delta = get_real("solver.delta");
  const std::string scheme = get_text("solver.scheme");
  if (scheme == "picard") {
    c.solver.scheme = Scheme::Picard;
  } else if (scheme == "splitstep") {
    c.solver.scheme = Scheme::SplitStep;
  } else {
    schema("solver.scheme", "expected picard or splitstep, got '" + scheme + "'");
  }
  c.solver.direction = narrow("solver.direction", get_int("solver.direction"));

  c.initial.kind = get_text("initial.kind");
  if (c.initial.kind != "gaussian" && c.initial.kind != "random" && c.initial.kind != "peaked") {
    schema("initial.kind", "expected gaussian, random or peaked");
  }
  c.initial.amplitude = get_real("initial.amplitude");
  c.initial.decay = get_real("initial.decay");
  if (c.initial.amplitude < 0) {
    schema("initial.amplitude", "must be non-negative");
  }

  c.m_schedule.clear();
  for (const std::string& s : to_list("truncation.m_schedule", *value("truncation.m_schedule"))) {
    const long long m = to_int("truncation.m_schedule", s);
    if (m < 1) {
      schema("truncation.m_schedule", "entries must be >= 1");
    }
    c.m_schedule.push_back(narrow("truncation.m_schedule", m));
  }
  if (!std::is_sorted(c.m_schedule.begin(), c.m_schedule.end()) ||
      std::adjacent_find(c.m_schedule.begin(), c.m_schedule.end()) != c.m_schedule.end()) {
    schema("truncation.m_schedule", "must be strictly increasing");
  }
  c.epsilon_list.clear();
  for (const std::string& s : to_list("stability.epsilon_list", *value("stability.epsilon_list"))) {
    const double e = to_real("stability.epsilon_list", s);
    if (!(e > 0)) {
      schema("stability.epsilon_list", "entries must be positive");
    }
    c.epsilon_list.push_back(e);
  }

  c.verify.samples = narrow("verify.samples", get_int("verify.samples"));
  c.verify.amp_min = get_real("verify.amp_min");
  c.verify.amp_max = get_real("verify.amp_max");
  c.verify.decay = get_real("verify.decay");
  c.verify.p1 = get_text("verify.p1");
  c.verify.p2 = get_text("verify.p2");
  c.verify.length = get_real("verify.length");
  c.verify.steps = narrow("verify.steps", get_int("verify.steps"));
  if (c.verify.samples < 1) {
    schema("verify.samples", "must be >= 1");
  }
  if (!(c.verify.amp_min > 0) || c.verify.amp_max < c.verify.amp_min) {
    schema("verify.amp_min", "need 0 < amp_min <= amp_max");
  }
  if (!(c.verify.length > 0) || c.verify.steps < 2 || c.verify.steps % 2 != 0) {
    schema("verify.steps", "need length > 0 and an even step count >= 2");
  }
  for (const char* key : {"verify.p1", "verify.p2"}) {
    try {
      Rational::parse(get_text(key));
    } catch (const Error& e) {
      schema(key, e.what());
    }
  }

  if (const auto q = value("blowup.q")) {
    c.blowup.q = unquote("blowup.q", *q);
  }
  if (const auto p = value("blowup.p")) {
    c.blowup.p = unquote("blowup.p", *p);
  }
  if (c.blowup.q.empty() != c.blowup.p.empty()) {
    schema("blowup", "give both q and p or neither");
  }
  for (const auto& [key, text] : {std::pair{"blowup.q", c.blowup.q}, std::pair{"blowup.p", c.blowup.p}}) {
    if (!text.empty()) {
      try {
        Rational::parse(text);
      } catch (const Error& e) {
        schema(key, e.what());
      }
    }
  }
  c.blowup.threshold = get_real("blowup.threshold");

  c.select.enabled = to_flag("select.enabled", *value("select.enabled"));
  c.select.min_T = get_real("select.min_T");
  c.select.count = narrow("select.count", get_int("select.count"));
  if (!(c.select.min_T > 0) || c.select.count < 1) {
    schema("select", "need min_T > 0 and count >= 1");
  }

  c.asserts.orthonormality = get_opt_real("assert.orthonormality");
  c.asserts.charge_drift = get_opt_real("assert.charge_drift");
  c.asserts.energy_drift = get_opt_real("assert.energy_drift");
  c.asserts.truncation_slope = get_opt_real("assert.truncation_slope");
  c.asserts.stability_spread = get_opt_real("assert.stability_spread");

  // Sub-config invariants; their messages already name the offending field.
  c.model.validate();
  c.nonlinearity.validate();
  c.solver.validate();

  if (c.model.n < 2 && is_critical(c.experiment)) {
    throw Error(ErrorKind::UnsupportedRegime, std::string("experiment ") + to_string(c.experiment) +
                                                  " needs the critical exponent, which requires model.n >= 2");
  }
  if (c.experiment == Experiment::VerifyEstimates) {
    check_embedding_range(Rational::parse(c.verify.p1), Rational::parse(c.verify.p2), c.model.n);
  }
  if (c.experiment == Experiment::Blowup && !c.blowup.q.empty()) {
    const Rational q = Rational::parse(c.blowup.q);
    const Rational p = Rational::parse(c.blowup.p);
    if (!admissible(q, p, c.model.n) || !(p > Rational(2))) {
      schema("blowup.p", "(q, p) must be admissible with p > 2");
    }
  }
  if (c.experiment == Experiment::Stability && c.epsilon_list.empty()) {
    schema("stability.epsilon_list", "required by the stability experiment");
  }
  if (c.experiment == Experiment::TruncationStudy && c.m_schedule.size() < 2) {
    schema("truncation.m_schedule", "the truncation study needs at least two levels");
  }
  return c;
}

}  // namespace

const char* to_string(Experiment e)
{
  switch (e) {
    case Experiment::Simulate: return "simulate";
    case Experiment::TruncationStudy: return "truncation-study";
    case Experiment::VerifyEstimates: return "verify-estimates";
    case Experiment::Conserve: return "conserve";
    case Experiment::Stability: return "stability";
    case Experiment::Blowup: return "blowup";
    case Experiment::BasisCheck: return "basis-check";
  }
  return "unknown";
}

bool is_critical(Experiment e)
{
  return e == Experiment::TruncationStudy || e == Experiment::VerifyEstimates || e == Experiment::Stability ||
         e == Experiment::Blowup;
}

std::string RunConfig::canonical_text() const
{
  std::map<std::string, std::string> kv;
  kv["experiment"] = to_string(experiment);
  kv["output_dir"] = output_dir;
  kv["seed"] = std::to_string(seed);
  kv["model.n"] = std::to_string(model.n);
  kv["model.K"] = std::to_string(model.K);
  kv["model.grid_order"] = std::to_string(model.grid_order);
  kv["basis.orthonormality_tol"] = format_real(basis.orthonormality);
  kv["basis.failure_tol"] = format_real(basis.failure);
  kv["basis.ladder_threshold"] = format_real(basis.ladder_threshold);
  kv["basis.fd_step"] = format_real(basis.fd_step);
  kv["nonlinearity.lambda"] = format_real(nonlinearity.lambda);
  kv["nonlinearity.alpha"] = format_real(nonlinearity.alpha);
  kv["nonlinearity.m"] = std::to_string(nonlinearity.m);
  kv["solver.t0"] = format_real(solver.t0);
  kv["solver.T"] = format_real(solver.T);
  kv["solver.n_steps"] = std::to_string(solver.n_steps);
  kv["solver.tol"] = format_real(solver.tol_fixed_point);
  kv["solver.max_iter"] = std::to_string(solver.max_iter);
  kv["solver.delta"] = format_real(solver.delta);
  kv["solver.scheme"] = to_string(solver.scheme);
  kv["solver.direction"] = std::to_string(solver.direction);
  kv["initial.kind"] = initial.kind;
  kv["initial.amplitude"] = format_real(initial.amplitude);
  kv["initial.decay"] = format_real(initial.decay);
  std::string list = "[";
  for (std::size_t i = 0; i < m_schedule.size(); ++i) {
    list += (i ? ", " : "") + std::to_string(m_schedule[i]);
  }
  kv["truncation.m_schedule"] = list + "]";
  list = "[";
  for (std::size_t i = 0; i < epsilon_list.size(); ++i) {
    list += (i ? ", " : "") + format_real(epsilon_list[i]);
  }
  kv["stability.epsilon_list"] = list + "]";
  kv["verify.samples"] = std::to_string(verify.samples);
  kv["verify.amp_min"] = format_real(verify.amp_min);
  kv["verify.amp_max"] = format_real(verify.amp_max);
  kv["verify.decay"] = format_real(verify.decay);
  kv["verify.p1"] = verify.p1;
  kv["verify.p2"] = verify.p2;
  kv["verify.length"] = format_real(verify.length);
  kv["verify.steps"] = std::to_string(verify.steps);
  kv["blowup.q"] = blowup.q;
  kv["blowup.p"] = blowup.p;
  kv["blowup.threshold"] = format_real(blowup.threshold);
  kv["select.enabled"] = select.enabled ? "true" : "false";
  kv["select.min_T"] = format_real(select.min_T);
  kv["select.count"] = std::to_string(select.count);
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("unset"); };
  kv["assert.orthonormality"] = opt(asserts.orthonormality);
  kv["assert.charge_drift"] = opt(asserts.charge_drift);
  kv["assert.energy_drift"] = opt(asserts.energy_drift);
  kv["assert.truncation_slope"] = opt(asserts.truncation_slope);
  kv["assert.stability_spread"] = opt(asserts.stability_spread);

  std::string out;
  for (const auto& [k, v] : kv) {
    // The output location does not change any result.
    if (k != "output_dir") {
      out += k + " = " + v + "\n";
    }
  }
  return out;
}

std::uint64_t RunConfig::hash() const
{
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_text()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string RunConfig::hash_hex() const
{
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

RunConfig parse_config_text(const std::string& text)
{
  return build(read_raw(text));
}

RunConfig parse_config_file(const std::filesystem::path& path)
{
  std::ifstream is(path);
  if (!is) {
    throw Error(ErrorKind::Io, "cannot read config file " + path.string());
  }
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::string default_config_text()
{
  std::string out = "# twisted-nls configuration; every key is optional.\n";
  std::string section;
  for (const KeyInfo& k : kKeys) {
    const std::string name = k.name;
    const auto dot = name.find('.');
    const std::string sec = dot == std::string::npos ? "" : name.substr(0, dot);
    if (sec != section) {
      out += "\n";
      section = sec;
    }
    std::string line = *k.fallback ? name + " = " + k.fallback : "# " + name + " =";
    if (*k.doc) {
      line.resize(std::max<std::size_t>(line.size() + 2, 36), ' ');
      line += "# ";
      line += k.doc;
    }
    out += line + "\n";
  }
  return out;
}

int exit_code_for(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::Io: return 2;
    case ErrorKind::Configuration:
    case ErrorKind::Usage:
    case ErrorKind::Precondition: return 3;
    case ErrorKind::UnsupportedRegime: return 4;
    default: return 5;
  }
}

}  // namespace tnls
