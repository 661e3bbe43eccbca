#include "tnls/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tnls/error.hpp"
#include "tnls/kernels.hpp"

namespace tnls {

namespace {

struct Exponents {
  Rational gamma, rho, gamma_dual, rho_dual;
};

Exponents exponents(int n)
{
  const AdmissiblePair pair = canonical_pair(n);
  return {pair.q, pair.p, conjugate(pair.q), conjugate(pair.p)};
}

std::vector<GridField> grids_of(const BasisTable& b, const SolutionTrace& u)
{
  std::vector<GridField> out;
  out.reserve(u.size());
  for (const SpectralField& f : u.fields) {
    out.push_back(synthesize(b, f));
  }
  return out;
}

SolutionTrace difference(const SolutionTrace& a, const SolutionTrace& c)
{
  SolutionTrace d;
  d.times = a.times;
  for (std::size_t k = 0; k < a.size(); ++k) {
    SpectralField f = a.fields[k];
    kernels::caxpy(cplx(-1.0, 0.0), c.fields[k].coeffs, f.coeffs);
    d.fields.push_back(std::move(f));
  }
  return d;
}

std::vector<GridField> grid_difference(std::span<const GridField> a, std::span<const GridField> c)
{
  std::vector<GridField> out(a.begin(), a.end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    kernels::caxpy(cplx(-1.0, 0.0), c[k].values, out[k].values);
  }
  return out;
}

std::vector<GridField> apply_G(const BasisTable& b, std::span<const GridField> u, const NonlinearitySpec& spec)
{
  std::vector<GridField> out;
  out.reserve(u.size());
  for (const GridField& g : u) {
    out.push_back(eval_G_m(b, g, spec));
  }
  return out;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi)
{
  std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
  return std::exp(d(rng));
}

double median(std::vector<double> v)
{
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

void EstimateReport::add(double lhs_value, std::vector<double> rhs, double param)
{
  double prod = 1.0;
  for (double r : rhs) {
    prod *= r;
  }
  lhs.push_back(lhs_value);
  rhs_structure.push_back(std::move(rhs));
  ratios.push_back(prod > 0.0 ? lhs_value / prod : 0.0);
  parameter.push_back(param);
  ++sample_count;
}

void EstimateReport::finalize()
{
  fitted_constant = 0.0;
  for (double r : ratios) {
    fitted_constant = std::max(fitted_constant, r);
  }
  violation_count = 0;
  for (double r : ratios) {
    violation_count += r > fitted_constant;
  }
}

double EstimateReport::fitted_for(double param) const
{
  double c = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (parameter[i] == param) {
      c = std::max(c, ratios[i]);
    }
  }
  return c;
}

nlohmann::json to_json(const EstimateReport& r)
{
  nlohmann::json j{{"lemma_id", r.lemma_id},
                   {"sample_count", r.sample_count},
                   {"skipped", r.skipped},
                   {"fitted_constant", r.fitted_constant},
                   {"violation_count", r.violation_count},
                   {"overflow", r.overflow},
                   {"lhs", r.lhs},
                   {"rhs_structure", r.rhs_structure},
                   {"ratios", r.ratios},
                   {"parameter", r.parameter},
                   {"notes", r.notes}};
  for (const auto& [k, v] : r.extras) {
    j["extras"][k] = v;
  }
  return j;
}

SpectralField random_field(const BasisTable& b, std::mt19937_64& rng, const RandomFieldSpec& spec)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField f = SpectralField::zeros(b);
  const int K = b.params().K;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    int degree = 0;
    bool top = false;
    for (int j = 0; j < b.n(); ++j) {
      degree += b.mu(k, j) + b.nu(k, j);
      top = top || b.nu(k, j) == K;
    }
    if (spec.in_range && top && K > 0) {
      continue;
    }
    f.coeffs[k] = cplx(re, im) * std::pow(1.0 + degree, -spec.decay);
  }
  const double amp = log_uniform(rng, spec.amp_min, spec.amp_max);
  const double norm = charge(f);
  for (cplx& c : f.coeffs) {
    c *= amp / norm;
  }
  return f;
}

std::vector<SpectralField> random_fields(const BasisTable& b, const RandomFieldSpec& spec)
{
  if (!(spec.amp_min > 0.0) || spec.amp_max < spec.amp_min || spec.count < 0) {
    throw Error(ErrorKind::Configuration, "random field spec: need 0 < amp_min <= amp_max and count >= 0");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    out.push_back(random_field(b, rng, spec));
  }
  return out;
}

SolutionTrace space_time_field(const BasisTable& b, const SpectralField& f, const SpaceTimeGrid& grid)
{
  SolverConfig cfg;
  cfg.t0 = 0.0;
  cfg.T = grid.length;
  cfg.n_steps = grid.steps;
  cfg.validate();
  return free_flow(b, f, cfg);
}

void check_embedding_range(const Rational& p1, const Rational& p2, int n)
{
  if (p1 < Rational(1)) {
    throw Error(ErrorKind::Precondition, "embedding: p1 must be >= 1");
  }
  if (p2 < p1) {
    throw Error(ErrorKind::Precondition, "embedding: p2 < p1 is outside every branch");
  }
  const Rational two_n(2 * n);
  if (p1 < two_n) {
    const Rational top = Rational(2 * n) * p1 * (two_n - p1).reciprocal();
    if (top < p2) {
      throw Error(ErrorKind::Precondition, "embedding: branch p1 < 2n needs p2 <= 2n p1 / (2n - p1) = " + top.str());
    }
  } else if (p1 == two_n && p2.is_infinite()) {
    throw Error(ErrorKind::Precondition, "embedding: branch p1 = 2n needs p2 < infinity");
  }
}

EstimateReport verify_embedding(const BasisTable& b, const RandomFieldSpec& specs, const Rational& p1,
                                const Rational& p2)
{
  check_embedding_range(p1, p2, b.n());
  EstimateReport r;
  r.lemma_id = "embedding W^{1," + p1.str() + "} -> L^" + p2.str();
  for (const SpectralField& f : random_fields(b, specs)) {
    const SobolevNorm s = sobolev_norm(b, f, p1.value());
    r.overflow = r.overflow || s.overflow;
    if (s.value == 0.0) {
      ++r.skipped;
      continue;
    }
    r.add(lp_norm(b, synthesize(b, f), p2.value()), {s.value});
  }
  r.finalize();
  return r;
}

EstimateReport verify_difference_estimate(const BasisTable& b, const RandomFieldSpec& specs,
                                          const NonlinearitySpec& spec, const std::vector<int>& m_list,
                                          const SpaceTimeGrid& grid)
{
  const Exponents e = exponents(b.n());
  const double power = 2.0 / (b.n() - 1);
  const double dt = grid.length / grid.steps;
  EstimateReport r;
  r.lemma_id = "difference";
  std::mt19937_64 rng(specs.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < specs.count; ++i) {
    const SpectralField f = random_field(b, rng, specs);
    SpectralField g = random_field(b, rng, specs);
    if (i % 2 == 1) {
      // nearby pair: v = u + small multiple of an independent direction
      const double s = std::pow(10.0, -3.0 * unit(rng)) * charge(f) / charge(g);
      SpectralField v = f;
      kernels::caxpy(cplx(s, 0.0), g.coeffs, v.coeffs);
      g = std::move(v);
    }
    const SolutionTrace u = space_time_field(b, f, grid);
    const SolutionTrace v = space_time_field(b, g, grid);
    const std::vector<GridField> ug = grids_of(b, u), vg = grids_of(b, v);
    const double dist = mixed_norm_grid(b, grid_difference(ug, vg), dt, e.gamma, e.rho).value;
    if (dist == 0.0) {
      ++r.skipped;
      r.notes.push_back("sample " + std::to_string(i) + ": u = v, skipped");
      continue;
    }
    const MixedNormReport nu = mixed_norm(b, u, e.gamma, e.rho);
    const MixedNormReport nv = mixed_norm(b, v, e.gamma, e.rho);
    r.overflow = r.overflow || nu.overflow || nv.overflow;
    const double size = std::pow(nu.value + nv.value, power);
    for (int m : m_list) {
      const NonlinearitySpec sm = spec.with_m(m);
      const double lhs = mixed_norm_grid(b, grid_difference(apply_G(b, ug, sm), apply_G(b, vg, sm)), dt,
                                         e.gamma_dual, e.rho_dual).value;
      r.add(lhs, {dist, size}, m);
    }
  }
  r.finalize();
  if (!m_list.empty()) {
    double lo = HUGE_VAL, hi = 0.0;
    for (int m : m_list) {
      const double c = r.fitted_for(m);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      r.extras["fitted_m" + std::to_string(m)] = c;
    }
    r.extras["m_spread"] = lo > 0.0 ? hi / lo : HUGE_VAL;
  }
  return r;
}

namespace {

// Appends the gap samples of one trace; returns the log-log slope of the nonzero gaps.
double truncation_samples(const BasisTable& b, const SolutionTrace& u, const NonlinearitySpec& spec,
                          const std::vector<int>& m_list, EstimateReport& r)
{
  const int n = b.n();
  const Exponents e = exponents(n);
  const double dt = std::abs(u.dt());
  const double length = std::abs(u.times.back() - u.times.front());
  const std::vector<GridField> ug = grids_of(b, u);
  const std::vector<GridField> g_full = apply_G(b, ug, spec.with_m(0));
  const MixedNormReport energy_norm = mixed_norm(b, u, Rational::infinity(), Rational(2));
  const MixedNormReport strichartz = mixed_norm(b, u, e.gamma, e.rho);
  r.overflow = r.overflow || energy_norm.overflow || strichartz.overflow;
  const double nn1 = static_cast<double>(n) * (n - 1);
  std::vector<double> ms, gaps;
  for (int m : m_list) {
    if (m < 1) {
      throw Error(ErrorKind::Usage, "truncation gap needs m >= 1");
    }
    const double gap =
        mixed_norm_grid(b, grid_difference(apply_G(b, ug, spec.with_m(m)), g_full), dt, e.gamma_dual, e.rho_dual)
            .value;
    r.add(gap,
          {std::pow(length, (n - 1.0) / (2.0 * n)), std::pow(static_cast<double>(m), -1.0 / nn1),
           std::pow(energy_norm.value, (n * n - n + 1.0) / nn1), std::pow(strichartz.value, 2.0 / (n - 1))},
          m);
    if (gap > 0.0) {
      ms.push_back(m);
      gaps.push_back(gap);
    }
  }
  return ms.size() >= 2 ? loglog_slope(ms, gaps) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

EstimateReport verify_truncation_gap(const BasisTable& b, const SolutionTrace& u, const NonlinearitySpec& spec,
                                     const std::vector<int>& m_list)
{
  EstimateReport r;
  r.lemma_id = "truncation-gap";
  const double slope = truncation_samples(b, u, spec, m_list, r);
  r.finalize();
  r.extras["slope"] = slope;
  bool active = false;
  for (double v : r.lhs) {
    active = active || v > 0.0;
  }
  if (!active) {
    r.notes.push_back("truncation inactive: max |u| is below every m in the list");
  }
  return r;
}

EstimateReport verify_truncation_gap_batch(const BasisTable& b, const RandomFieldSpec& specs,
                                           const NonlinearitySpec& spec, const std::vector<int>& m_list,
                                           const SpaceTimeGrid& grid)
{
  EstimateReport r;
  r.lemma_id = "truncation-gap";
  std::vector<double> slopes;
  for (const SpectralField& f : random_fields(b, specs)) {
    const double s = truncation_samples(b, space_time_field(b, f, grid), spec, m_list, r);
    if (std::isfinite(s)) {
      slopes.push_back(s);
    }
  }
  r.finalize();
  r.extras["slope"] = median(slopes);
  r.extras["slope_count"] = static_cast<double>(slopes.size());
  if (slopes.empty()) {
    r.notes.push_back("truncation inactive on every sample");
  }
  return r;
}

GridField apply_S_to_G_m(const BasisTable& b, const SpectralField& u, const NonlinearitySpec& spec, Ladder which,
                         bool identity)
{
  const GridField ug = synthesize(b, u);
  if (identity) {
    return eval_G_m(b, ug, spec);
  }
  const GridField zu = grid_apply_ladder(b, u, Ladder{which.coord, false});
  const GridField zbu = grid_apply_ladder(b, u, Ladder{which.coord, true});
  const std::span<const cplx> z = b.coordinate(which.coord);
  const bool plugin = spec.form == NonlinearityForm::Plugin;
  GridField out = GridField::zeros(b);
  for (std::size_t p = 0; p < ug.values.size(); ++p) {
    const cplx v = ug.values[p];
    const double sigma = std::abs(v);
    std::vector<double> pt;
    if (plugin) {
      pt = b.node(p);
    }
    const double ps = psi_m(sigma, spec, pt);
    const cplx su = which.bar ? zbu.values[p] : zu.values[p];
    cplx value = ps * su;
    if (sigma >= 1e-8) {
      const cplx du = zu.values[p] - 0.5 * std::conj(z[p]) * v;   // (d/dx - i d/dy) u
      const cplx dbu = 0.5 * z[p] * v - zbu.values[p];            // (d/dx + i d/dy) u
      const double dps = psi_m_derivative(sigma, spec, pt);
      const cplx d_abs = (std::conj(v) * du + v * std::conj(dbu)) / (2.0 * sigma);
      const cplx db_abs = (std::conj(v) * dbu + v * std::conj(du)) / (2.0 * sigma);
      cplx d_psi = dps * d_abs, db_psi = dps * db_abs;
      if (plugin) {
        // explicit z-dependence of a plugin psi
        const double h = 1e-6;
        const int ix = 2 * which.coord, iy = ix + 1;
        std::vector<double> a = pt, c = pt;
        a[ix] += h;
        c[ix] -= h;
        const double dx = (psi_m(sigma, spec, a) - psi_m(sigma, spec, c)) / (2 * h);
        a = pt;
        c = pt;
        a[iy] += h;
        c[iy] -= h;
        const double dy = (psi_m(sigma, spec, a) - psi_m(sigma, spec, c)) / (2 * h);
        d_psi += cplx(dx, -dy);
        db_psi += cplx(dx, dy);
      }
      value += which.bar ? -v * db_psi : v * d_psi;
    }
    out.values[p] = value;
  }
  return out;
}

std::vector<EstimateReport> verify_derivative_bound(const BasisTable& b, const RandomFieldSpec& specs,
                                                    const NonlinearitySpec& spec, const std::vector<int>& m_list,
                                                    const SpaceTimeGrid& grid)
{
  const int n = b.n();
  const Exponents e = exponents(n);
  const double dt = grid.length / grid.steps;
  const double power = (n + 1.0) / (n - 1.0);
  std::vector<EstimateReport> reports(1 + 2 * static_cast<std::size_t>(n));
  reports[0].lemma_id = "derivative:Id";
  for (int j = 0; j < n; ++j) {
    reports[1 + 2 * j].lemma_id = "derivative:Z" + std::to_string(j + 1);
    reports[2 + 2 * j].lemma_id = "derivative:Zbar" + std::to_string(j + 1);
  }
  for (const SpectralField& f : random_fields(b, specs)) {
    const SolutionTrace u = space_time_field(b, f, grid);
    const MixedNormReport nu = mixed_norm(b, u, e.gamma, e.rho);
    const double rhs = std::pow(nu.value, power);
    for (int m : m_list) {
      const NonlinearitySpec sm = spec.with_m(m);
      for (std::size_t s = 0; s < reports.size(); ++s) {
        const bool identity = s == 0;
        const Ladder which{identity ? 0 : static_cast<int>((s - 1) / 2), s % 2 == 0};
        std::vector<GridField> sg;
        for (const SpectralField& c : u.fields) {
          sg.push_back(apply_S_to_G_m(b, c, sm, which, identity));
        }
        reports[s].add(mixed_norm_grid(b, sg, dt, e.gamma_dual, e.rho_dual).value, {rhs}, m);
        reports[s].overflow = reports[s].overflow || nu.overflow;
      }
    }
  }
  for (EstimateReport& r : reports) {
    r.finalize();
  }
  return reports;
}

ConservationReport conservation_report(const SolutionTrace& trace)
{
  if (trace.diagnostics.size() != trace.size()) {
    throw Error(ErrorKind::Usage, "conservation_report needs computed diagnostics");
  }
  ConservationReport r;
  r.times = trace.times;
  if (trace.size() == 0) {
    return r;
  }
  const TraceDiagnostics& d0 = trace.diagnostics.front();
  const double qscale = d0.charge > 0.0 ? d0.charge : 1.0;
  const double escale = std::max(1.0, std::abs(d0.energy));
  const double emscale = std::max(1.0, std::abs(d0.energy_m));
  for (const TraceDiagnostics& d : trace.diagnostics) {
    r.charge_drift.push_back(std::abs(d.charge - d0.charge) / qscale);
    r.energy_drift.push_back(std::abs(d.energy - d0.energy) / escale);
    r.energy_m_drift.push_back(std::abs(d.energy_m - d0.energy_m) / emscale);
    r.max_charge_drift = std::max(r.max_charge_drift, r.charge_drift.back());
    r.max_energy_drift = std::max(r.max_energy_drift, r.energy_drift.back());
    r.max_energy_m_drift = std::max(r.max_energy_m_drift, r.energy_m_drift.back());
  }
  return r;
}

StabilityTable stability_experiment(const BasisTable& b, const SpectralField& f, const SpectralField& direction,
                                    const std::vector<double>& epsilons, const NonlinearitySpec& spec,
                                    const SolverConfig& cfg)
{
  const Exponents e = exponents(b.n());
  const SolutionTrace base = solve(b, f, spec, cfg);
  StabilityTable t;
  for (double eps : epsilons) {
    StabilityRow row;
    row.epsilon = eps;
    SpectralField fk = f;
    kernels::caxpy(cplx(eps, 0.0), direction.coeffs, fk.coeffs);
    SpectralField df = SpectralField::zeros(b);
    kernels::caxpy(cplx(eps, 0.0), direction.coeffs, df.coeffs);
    row.data_distance = sobolev_norm(b, df, 2.0).value;
    try {
      const SolutionTrace uk = solve(b, fk, spec, cfg);
      const SolutionTrace d = difference(base, uk);
      row.distance_canonical = mixed_norm(b, d, e.gamma, e.rho).value;
      row.distance_energy = mixed_norm(b, d, Rational::infinity(), Rational(2)).value;
      row.ratio = eps != 0.0 ? row.distance_canonical / std::abs(eps) : 0.0;
    } catch (const Error& err) {
      row.failed = true;
      row.error = err.what();
    }
    t.rows.push_back(row);
  }
  // Monotone: larger |epsilon| never gives a smaller distance.
  std::vector<const StabilityRow*> ok;
  for (const StabilityRow& row : t.rows) {
    if (!row.failed) {
      ok.push_back(&row);
    }
  }
  std::sort(ok.begin(), ok.end(), [](auto* a, auto* c) { return std::abs(a->epsilon) > std::abs(c->epsilon); });
  double lo = HUGE_VAL, hi = 0.0;
  for (std::size_t i = 0; i < ok.size(); ++i) {
    if (i > 0 && !(ok[i]->distance_canonical < ok[i - 1]->distance_canonical)) {
      t.monotone = false;
    }
    if (ok[i]->epsilon != 0.0) {
      lo = std::min(lo, ok[i]->ratio);
      hi = std::max(hi, ok[i]->ratio);
    }
  }
  t.monotone = t.monotone && ok.size() == t.rows.size();
  t.ratio_spread = lo > 0.0 && hi > 0.0 ? hi / lo : HUGE_VAL;
  return t;
}

BlowupTrace blowup_monitor(const BasisTable& b, const SpectralField& f, const NonlinearitySpec& spec,
                           const SolverConfig& cfg, const AdmissiblePair& pair, double threshold)
{
  if (!admissible(pair.q, pair.p, b.n())) {
    throw Error(ErrorKind::Precondition, "blowup monitor: (" + pair.q.str() + ", " + pair.p.str() +
                                             ") is not admissible");
  }
  if (!(Rational(2) < pair.p)) {
    throw Error(ErrorKind::Precondition, "blowup monitor: the alternative is stated for p > 2 only");
  }
  BlowupTrace out;
  SolutionTrace u;
  try {
    u = solve(b, f, spec, cfg);
  } catch (const SolveError& e) {
    out.diverged = true;
    out.growth = true;
    out.message = e.what();
    return out;
  }
  const double q = pair.q.value();
  const double dt = std::abs(cfg.step());
  double integral = 0.0, running_max = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double s = sobolev_norm(b, u.fields[k], pair.p.value()).value;
    double value;
    if (pair.q.is_infinite()) {
      running_max = std::max(running_max, s);
      value = running_max;
    } else {
      const double sq = std::pow(s, q);
      if (k > 0) {
        integral += 0.5 * dt * (prev + sq);
      }
      prev = sq;
      value = std::pow(integral, 1.0 / q);
    }
    out.times.push_back(u.times[k]);
    out.running_norm.push_back(value);
    if (value > threshold) {
      out.growth = true;
    }
  }
  if (out.growth) {
    out.message = "running norm exceeded the threshold";
  }
  return out;
}

double delta_bound(double C, int n)
{
  if (n < 2) {
    throw Error(ErrorKind::UnsupportedRegime, "delta condition needs n >= 2");
  }
  return 0.25 * std::pow(1.0 / (2.0 * C), (n - 1) / 2.0);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
  const std::size_t N = x.size();
  if (N < 2 || y.size() != N) {
    throw Error(ErrorKind::Usage, "loglog_slope needs two or more points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (N * sxy - sx * sy) / (N * sxx - sx * sx);
}

}  // namespace tnls
