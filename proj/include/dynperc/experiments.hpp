#ifndef DYNPERC_EXPERIMENTS_HPP
#define DYNPERC_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dynperc/config.hpp"
#include "dynperc/csv.hpp"
#include "dynperc/effective_radius.hpp"
#include "dynperc/estimators.hpp"
#include "dynperc/exact_oracle.hpp"
#include "dynperc/lattice_animal.hpp"

namespace dynperc {

// Everything one subcommand produces. `failed` marks a hard failure whose
// report is still complete (oracle identity violations).
struct RunOutput {
  std::vector<Table> tables;
  std::int64_t samples = 0, rejected = 0;
  std::vector<std::string> warnings, notes;
  std::string report;  // human-readable summary for stdout
  bool failed = false;
};

inline constexpr const char* kQualitative = "finite-n diagnostic; orderings only, no asymptotic constants asserted";

// ---------------------------------------------------------------- sweep

inline RunOutput run_sweep(const ExperimentConfig& cfg, const Executor& exec) {
  const auto xs = sweep_samples(cfg.sim, exec);
  const SweepResult r = aggregate_sweep(cfg.sim, xs);
  RunOutput out;
  out.samples = r.samples;
  out.rejected = r.rejected;
  out.notes.push_back(kQualitative);
  Table t{"sweep",
          {"t", "mean_chem", "mean_chem_se", "mean_trunc", "mean_trunc_se", "cov_chem", "cov_chem_se", "cov_trunc",
           "cov_trunc_se", "corr_chem", "corr_chem_se", "overlap_chem", "overlap_chem_se", "overlap_trunc",
           "overlap_trunc_se", "coincidence", "coincidence_se"},
          {}};
  for (std::size_t j = 0; j < r.t.size(); ++j) {
    std::vector<std::string> row{cell(r.t[j])};
    for (const Estimate* e : {&r.mean_chem[j], &r.mean_trunc[j], &r.cov_chem[j], &r.cov_trunc[j], &r.corr_chem[j],
                              &r.overlap_chem[j], &r.overlap_trunc[j], &r.coincidence[j]})
      push_estimate(row, *e);
    t.add(row);
  }
  Table drops{"sweep_drops", {"t_from", "t_to", "drop_chem", "drop_chem_se", "drop_trunc", "drop_trunc_se"}, {}};
  for (std::size_t j = 0; j + 1 < r.t.size(); ++j) {
    std::vector<std::string> row{cell(r.t[j]), cell(r.t[j + 1])};
    push_estimate(row, r.overlap_drop_chem[j]);
    push_estimate(row, r.overlap_drop_trunc[j]);
    drops.add(row);
  }
  Table summary{"sweep_summary", {"quantity", "value", "se"}, {}};
  auto put = [&](const char* q, const Estimate& e) { summary.add({q, cell(e.value), cell(e.se)}); };
  put("var_chem", r.var_chem);
  put("var_trunc", r.var_trunc);
  put("all_chem", r.all_chem);
  put("all_trunc", r.all_trunc);
  summary.add({"samples", cell(r.samples), "0"});
  summary.add({"rejected", cell(r.rejected), "0"});
  // overlap integral: trapezoid per sample for the error, bracket from the means
  Table integ{"overlap_integral", {"mode", "trapezoid", "trapezoid_se", "bracketed", "lower", "upper", "warning"}, {}};
  auto integrate = [&](const char* mode, auto member, const std::vector<Estimate>& means,
                       const std::vector<Estimate>& dr) {
    std::vector<double> v, per;
    for (const auto& e : means) v.push_back(e.value);
    for (const auto& s : xs)
      if (!s.rejected) per.push_back(overlap_integral(r.t, s.*member).trapezoid);
    const OverlapIntegral oi = overlap_integral(r.t, v, dr);
    const Estimate pe = mean_estimate(per);
    integ.add({mode, cell(oi.trapezoid), cell(pe.se), cell(oi.bracketed), cell(oi.lower), cell(oi.upper),
               cell(oi.warning)});
    if (!oi.warning.empty()) out.warnings.push_back(std::string(mode) + " overlap: " + oi.warning);
  };
  integrate("chemical", &SweepSample::overlap_chem, r.overlap_chem, r.overlap_drop_chem);
  integrate("truncated", &SweepSample::overlap_trunc, r.overlap_trunc, r.overlap_drop_trunc);
  out.tables = {t, drops, summary, integ};
  std::ostringstream os;
  os << "sweep: " << r.samples << " samples, " << r.rejected << " rejected, Var(D) = " << format_double(r.var_chem.value)
     << ", E|pi| = " << format_double(r.all_chem.value) << "\n";
  out.report = os.str();
  return out;
}

// ---------------------------------------------------------------- oracle

inline std::vector<OracleInstance> oracle_instances(const OracleConfig& oc) {
  std::vector<OracleInstance> v;
  auto make = [&](std::vector<mpq_class> f) {
    OracleInstance in;
    in.n = oc.E;
    in.p = oc.p;
    in.ell = oc.ell;
    in.L = oc.L;
    in.f = std::move(f);
    v.push_back(std::move(in));
  };
  if (!oc.f_table_text.empty()) make(oc.table());
  else
    for (int k = 0; k < oc.f_count; ++k) make(random_table(oc.E, oc.f_seed, static_cast<std::uint64_t>(k)));
  return v;
}

inline RunOutput run_oracle(const OracleConfig& oc) {
  RunOutput out;
  Table checks{"oracle_checks", {"instance", "check", "ok", "detail"}, {}};
  Table polys{"oracle_polynomials", {"instance", "quantity", "variable", "polynomial"}, {}};
  std::vector<int> nest = oc.nest;
  if (nest.empty())
    for (int m = oc.E + 1; m <= std::min(oc.E + 2, kMaxOracleEdges); ++m) nest.push_back(m);
  std::ostringstream os;
  const auto instances = oracle_instances(oc);
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const OracleInstance& in = instances[k];
    validate(in);
    OracleReport rep = verify_all(in);
    // φ for h = f at each edge, other rates j/(E+1)
    std::vector<mpq_class> others;
    for (int j = 0; j < in.n; ++j) others.emplace_back(j + 1, in.n + 1);
    for (int e = 0; e < in.n; ++e) rep.append(verify_monotonicity(in, in.f, e, others));
    if (!nest.empty()) rep.append(verify_countable_limit(in, nest, oc.f_seed + k));
    for (const auto& c : rep.checks) checks.add({cell(static_cast<int>(k)), cell(c.name), cell(c.ok), cell(c.detail)});
    const Polynomial cov = covariance_poly(in);
    polys.add({cell(static_cast<int>(k)), "covariance", "t", cell(cov.str("t"))});
    polys.add({cell(static_cast<int>(k)), "representation", "t", cell(representation_poly(in).str("t"))});
    for (int e = 0; e < in.n; ++e)
      polys.add({cell(static_cast<int>(k)), "coinfluence_" + std::to_string(e), "s",
                 cell(coinfluence_poly(in, e).str("s"))});
    os << "instance " << k << ": Cov(t) = " << cov.str("t") << "\n";
    std::int64_t bad = 0;
    for (const auto& c : rep.checks)
      if (!c.ok) {
        ++bad;
        os << "  FAIL " << c.name << ": " << c.detail << "\n";
      }
    os << "  " << rep.checks.size() - static_cast<std::size_t>(bad) << "/" << rep.checks.size() << " identities hold\n";
    if (bad) out.failed = true;
  }
  out.samples = static_cast<std::int64_t>(instances.size());
  out.tables = {checks, polys};
  out.report = os.str();
  return out;
}

// ---------------------------------------------------------------- radius

inline RadiusParams radius_params(const SimulationParams& sim) { return {sim.radius_constant(), sim.truncation(), 1 << 20}; }

struct RadiusTail {
  std::vector<std::int64_t> count;  // count[r] for r >= 1; index 0 unused
  std::int64_t overflow = 0, edges = 0;
  // S(k) = P(r > k), overflow counted as larger than every level
  std::vector<double> survival;
  std::vector<std::int64_t> survivors;
  LinearFit fit;
  int fit_lo = 0, fit_hi = -1;  // fitted levels
};

inline RadiusTail summarize_radii(const std::vector<RadiusRecord>& recs, int min_count) {
  RadiusTail t;
  for (const auto& r : recs) {
    ++t.edges;
    if (r.overflow) {
      ++t.overflow;
      continue;
    }
    if (static_cast<std::size_t>(r.r) >= t.count.size()) t.count.resize(static_cast<std::size_t>(r.r) + 1, 0);
    ++t.count[static_cast<std::size_t>(r.r)];
  }
  if (t.count.empty()) t.count.resize(1, 0);
  std::int64_t above = t.edges;
  for (std::size_t k = 0; k < t.count.size(); ++k) {
    above -= t.count[k];
    t.survivors.push_back(above);
    t.survival.push_back(t.edges ? static_cast<double>(above) / static_cast<double>(t.edges) : 0.0);
  }
  // fit log S(k) over the first run of levels k >= 1 with count[k] >= min_count
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k < t.count.size(); ++k) {
    if (t.count[k] < min_count || t.survivors[k] == 0) {
      if (t.fit_hi >= 0) break;
      continue;
    }
    if (t.fit_hi < 0) t.fit_lo = static_cast<int>(k);
    t.fit_hi = static_cast<int>(k);
    xs.push_back(static_cast<double>(k));
    ys.push_back(std::log(t.survival[k]));
  }
  if (xs.size() >= 2) t.fit = least_squares(xs, ys);
  return t;
}

// Edges with lower endpoint uniform in Λ_spread(0) and uniform axis, drawn
// from the edge-choice stream of each sample.
inline std::vector<RadiusRecord> sample_radii(const ExperimentConfig& cfg, const Executor& exec) {
  SimulationParams sim = cfg.sim;
  sim.side = cfg.radius_side;
  const auto lat = std::make_shared<const BoxLattice>(sim.d, cfg.radius_side);
  const RadiusParams rp = radius_params(cfg.sim);
  const int per = cfg.radius_per_sample;
  const int samples = (cfg.radius_edges + per - 1) / per;
  std::vector<std::vector<RadiusRecord>> out(static_cast<std::size_t>(samples));
  std::vector<RadiusWorkspace> ws(static_cast<std::size_t>(exec.workers));
  exec.run(out.size(), [&](std::size_t k, int w) {
    const CoupledEnvironment env = sample_environment(lat, sim, k);
    RngStream rng(sim.seed, StreamTag::edge_choice, k);
    const int m = static_cast<int>(std::min<std::int64_t>(per, cfg.radius_edges - static_cast<std::int64_t>(k) * per));
    const auto span = static_cast<std::uint64_t>(2 * cfg.radius_spread + 1);
    for (int i = 0; i < m; ++i) {
      Coord c(static_cast<std::size_t>(sim.d));
      for (auto& x : c) x = static_cast<int>(rng.below(span)) - cfg.radius_spread;
      const int axis = static_cast<int>(rng.below(static_cast<std::uint64_t>(sim.d)));
      const EdgeId e = lat->edge_up(lat->vertex(c), axis);
      out[k].push_back(radius(env, e, cfg.t, rp, ws[static_cast<std::size_t>(w)]));
    }
  });
  std::vector<RadiusRecord> all;
  for (auto& v : out) all.insert(all.end(), v.begin(), v.end());
  return all;
}

struct LocalityResult {
  int ell = 0;
  std::int64_t trials = 0, disagreements = 0, events = 0;  // events: trials with r_e = ell
};

// Resample everything outside Λ_{C* ell}(x_e) and compare 1{r_e = ell}.
inline std::vector<LocalityResult> locality_trials(const ExperimentConfig& cfg, const Executor& exec) {
  const RadiusParams rp = radius_params(cfg.sim);
  std::vector<LocalityResult> res;
  for (int ell : cfg.locality_ell) {
    const int side = rp.C_star * ell + 2;
    const auto lat = std::make_shared<const BoxLattice>(cfg.sim.d, side);
    SimulationParams sim = cfg.sim;
    sim.side = side;
    const EdgeId e = lat->edge_up(lat->vertex(Coord(static_cast<std::size_t>(sim.d), 0)), 0);
    const std::size_t n = static_cast<std::size_t>(cfg.locality_trials);
    std::vector<char> agree(n), hit(n);
    std::vector<RadiusWorkspace> ws(static_cast<std::size_t>(exec.workers));
    exec.run(n, [&](std::size_t k, int w) {
      auto& wsw = ws[static_cast<std::size_t>(w)];
      const CoupledEnvironment env = sample_environment(lat, sim, (static_cast<std::uint64_t>(ell) << 32) | k);
      const CoupledEnvironment other = perturb_outside(env, e, rp.C_star * ell, sim.seed, (static_cast<std::uint64_t>(ell) << 32) | k);
      agree[k] = locality_check(env, other, e, ell, cfg.t, rp, wsw);
      RadiusParams capped = rp;
      capped.max_N = ell;
      hit[k] = radius(env, e, cfg.t, capped, wsw).r == ell;
    });
    LocalityResult r;
    r.ell = ell;
    r.trials = static_cast<std::int64_t>(n);
    for (std::size_t k = 0; k < n; ++k) {
      r.disagreements += !agree[k];
      r.events += hit[k];
    }
    res.push_back(r);
  }
  return res;
}

struct BypassTotals {
  std::int64_t samples = 0, rejected = 0, checked = 0, violations = 0, skipped = 0, overflow = 0;
  std::int64_t max_extra = 0;
};

// The box gets an extra margin of `margin_levels` * C_* so radius windows
// around geodesic edges are not clipped.
inline BypassTotals bypass_run(const SimulationParams& sim, int samples, double t, int bound, const Executor& exec,
                               int margin_levels = 6) {
  SimulationParams prm = sim;
  prm.samples = samples;
  prm.side = 0;
  prm.side = prm.box_side() + margin_levels * prm.radius_constant();
  validate(prm);
  const auto lat = lattice_for(prm);
  const Endpoints z = endpoints_for(*lat, prm);
  const RadiusParams rp = radius_params(prm);
  const std::size_t n = static_cast<std::size_t>(samples);
  std::vector<BypassReport> reps(n);
  std::vector<char> bad(n, 0);
  std::vector<RadiusWorkspace> ws(static_cast<std::size_t>(exec.workers));
  exec.run(n, [&](std::size_t k, int w) {
    auto& wsw = ws[static_cast<std::size_t>(w)];
    const CoupledEnvironment env = sample_environment(lat, prm, k);
    try {
      const NoiseLevel lv = summaries_at(env, 0.0, rp.M, z, wsw.search);
      reps[k] = verify_bypass(env, t, lv.trunc, rp, bound, wsw);
    } catch (const NoGiantCluster&) {
      bad[k] = 1;
    }
  });
  BypassTotals b;
  b.samples = samples;
  for (std::size_t k = 0; k < n; ++k) {
    if (bad[k]) {
      ++b.rejected;
      continue;
    }
    b.checked += reps[k].checked;
    b.violations += reps[k].violations;
    b.skipped += reps[k].skipped_near_endpoints;
    b.overflow += reps[k].overflow;
    for (const auto& be : reps[k].edges) b.max_extra = std::max(b.max_extra, be.extra);
  }
  return b;
}

inline RunOutput run_radius(const ExperimentConfig& cfg, const Executor& exec) {
  RunOutput out;
  out.notes.push_back("V events use the ring-to-ring geodesic segment surrogate above N = 1");
  const RadiusTail tail = summarize_radii(sample_radii(cfg, exec), cfg.min_count);
  out.samples = tail.edges;
  Table t{"radius_tail", {"r", "count", "survivors", "survival"}, {}};
  for (std::size_t k = 0; k < tail.count.size(); ++k)
    t.add({cell(static_cast<int>(k)), cell(tail.count[k]), cell(tail.survivors[k]), cell(tail.survival[k])});
  Table f{"radius_fit", {"edges", "overflow", "k_min", "k_max", "points", "slope", "intercept", "r2"}, {}};
  f.add({cell(tail.edges), cell(tail.overflow), cell(tail.fit_lo), cell(tail.fit_hi),
         cell(static_cast<long>(tail.fit.points)), cell(tail.fit.slope), cell(tail.fit.intercept), cell(tail.fit.r2)});
  Table loc{"locality", {"ell", "trials", "events", "disagreements"}, {}};
  for (const auto& r : locality_trials(cfg, exec))
    loc.add({cell(r.ell), cell(r.trials), cell(r.events), cell(r.disagreements)});
  out.tables = {t, f, loc};
  if (cfg.bypass_samples > 0) {
    const int bound = cfg.bypass_bound > 0 ? cfg.bypass_bound : cfg.sim.radius_constant();
    const BypassTotals b = bypass_run(cfg.sim, cfg.bypass_samples, cfg.t, bound, exec);
    out.rejected = b.rejected;
    Table by{"bypass", {"bound", "samples", "rejected", "checked", "violations", "skipped_near_endpoints", "overflow", "max_extra"}, {}};
    by.add({cell(bound), cell(b.samples), cell(b.rejected), cell(b.checked), cell(b.violations), cell(b.skipped),
            cell(b.overflow), cell(b.max_extra)});
    out.tables.push_back(by);
  }
  std::ostringstream os;
  os << "radius: " << tail.edges << " edges, slope " << format_double(tail.fit.slope) << ", R^2 "
     << format_double(tail.fit.r2) << " over k in [" << tail.fit_lo << ", " << tail.fit_hi << "]\n";
  out.report = os.str();
  return out;
}

// ---------------------------------------------------------------- animal

struct AnimalRow {
  int N = 0, L = 0;
  double q = 0.0;
  Estimate gamma;
  double ratio = 0.0;  // E[Γ] / (L N^d q^{1/d})
  bool exact = true;
};

inline std::vector<AnimalRow> animal_table(const ExperimentConfig& cfg, const Executor& exec) {
  const int d = cfg.sim.d;
  int Lmax = 1;
  for (int L : cfg.animal_L) Lmax = std::max(Lmax, L);
  const auto lat = std::make_shared<const BoxLattice>(d, Lmax + 1);
  std::vector<AnimalRow> rows;
  for (int N : cfg.animal_N) {
    const std::size_t n = static_cast<std::size_t>(cfg.sim.samples);
    std::vector<std::vector<AnimalResult>> res(n);
    exec.run(n, [&](std::size_t k, int) {
      const AnimalField f = synthetic_field(lat, N, cfg.animal_q_block, cfg.animal_q_edge, cfg.sim.seed,
                                            (static_cast<std::uint64_t>(N) << 32) | k);
      for (int L : cfg.animal_L) res[k].push_back(greedy_animal(f, L));
    });
    const double q = cfg.animal_q_block * cfg.animal_q_edge;
    for (std::size_t j = 0; j < cfg.animal_L.size(); ++j) {
      AnimalRow r;
      r.N = N;
      r.L = cfg.animal_L[j];
      r.q = q;
      std::vector<double> g;
      for (std::size_t k = 0; k < n; ++k) {
        g.push_back(res[k][j].value);
        r.exact = r.exact && res[k][j].exact;
      }
      r.gamma = mean_estimate(g);
      const double scale = r.L * std::pow(static_cast<double>(N), d) * std::pow(q, 1.0 / d);
      r.ratio = scale > 0 ? r.gamma.value / scale : 0.0;
      rows.push_back(r);
    }
  }
  return rows;
}

struct MomentRow {
  int n = 0;
  std::int64_t samples = 0, rejected = 0, overflow = 0;
  Estimate value;  // E[(Σ_{e∈γ} ĥr_e²)²] / |γ|²
};

inline std::vector<MomentRow> radius_moment_table(const ExperimentConfig& cfg, const Executor& exec) {
  std::vector<MomentRow> rows;
  for (int n : cfg.moment_n) {
    SimulationParams prm = cfg.sim;
    prm.n = n;
    prm.side = 0;
    prm.M = 0;
    prm.samples = cfg.moment_samples;
    validate(prm);
    const auto lat = lattice_for(prm);
    const Endpoints z = endpoints_for(*lat, prm);
    const RadiusParams rp = radius_params(prm);
    const std::size_t m = static_cast<std::size_t>(prm.samples);
    std::vector<double> v(m, 0.0);
    std::vector<std::int64_t> over(m, 0);
    std::vector<char> bad(m, 0);
    std::vector<RadiusWorkspace> ws(static_cast<std::size_t>(exec.workers));
    exec.run(m, [&](std::size_t k, int w) {
      auto& wsw = ws[static_cast<std::size_t>(w)];
      const CoupledEnvironment env = sample_environment(lat, prm, k);
      try {
        const NoiseLevel lv = summaries_at(env, 0.0, rp.M, z, wsw.search);
        const EnvironmentView view = view_at(env, 0.0, WeightMode::truncated, rp.M);
        const auto gamma = canonical_geodesic(view, lv.trunc.from_a, lv.trunc.b);
        for (EdgeId e : gamma) over[k] += radius(env, e, cfg.t, rp, wsw).overflow;
        const double len = static_cast<double>(gamma.size());
        v[k] = len > 0 ? radius_square_moment(env, cfg.t, rp, gamma, wsw) / (len * len) : 0.0;
      } catch (const NoGiantCluster&) {
        bad[k] = 1;
      }
    });
    MomentRow r;
    r.n = n;
    r.samples = static_cast<std::int64_t>(m);
    std::vector<double> ok;
    for (std::size_t k = 0; k < m; ++k) {
      if (bad[k]) {
        ++r.rejected;
        continue;
      }
      ok.push_back(v[k]);
      r.overflow += over[k];
    }
    check_rejections(r.rejected, r.samples);
    r.value = batch_statistic(
        ok.size(), [&](std::size_t a, std::size_t b) { return mean_of(ok, a, b); },
        static_cast<int>(std::min<std::size_t>(kMinBatches, ok.size())));
    rows.push_back(r);
  }
  return rows;
}

inline RunOutput run_animal(const ExperimentConfig& cfg, const Executor& exec) {
  RunOutput out;
  const auto rows = animal_table(cfg, exec);
  Table t{"animal", {"N", "L", "q", "mean_gamma", "mean_gamma_se", "ratio", "exact"}, {}};
  std::map<int, std::pair<double, double>> span;
  for (const auto& r : rows) {
    t.add({cell(r.N), cell(r.L), cell(r.q), cell(r.gamma.value), cell(r.gamma.se), cell(r.ratio), cell(r.exact)});
    auto [it, fresh] = span.try_emplace(r.N, r.ratio, r.ratio);
    if (!fresh) it->second = {std::min(it->second.first, r.ratio), std::max(it->second.second, r.ratio)};
  }
  Table shape{"animal_shape", {"N", "ratio_min", "ratio_max", "max_over_min"}, {}};
  for (const auto& [N, mm] : span)
    shape.add({cell(N), cell(mm.first), cell(mm.second), cell(mm.first > 0 ? mm.second / mm.first : 0.0)});
  out.tables = {t, shape};
  out.samples = cfg.sim.samples;
  if (!cfg.moment_n.empty()) {
    Table mt{"radius_moment", {"n", "samples", "rejected", "overflow_edges", "value", "value_se"}, {}};
    for (const auto& r : radius_moment_table(cfg, exec)) {
      out.rejected += r.rejected;
      mt.add({cell(r.n), cell(r.samples), cell(r.rejected), cell(r.overflow), cell(r.value.value), cell(r.value.se)});
    }
    out.tables.push_back(mt);
  }
  std::ostringstream os;
  for (const auto& [N, mm] : span)
    os << "animal N=" << N << ": ratio in [" << format_double(mm.first) << ", " << format_double(mm.second) << "]\n";
  out.report = os.str();
  return out;
}

// ---------------------------------------------------------------- regime, scaling, coincidence

inline RunOutput run_regime(const ExperimentConfig& cfg, const Executor& exec) {
  const RegimeReport r = regime_sweep(cfg.sim, cfg.betas, exec);
  RunOutput out;
  out.samples = r.samples;
  out.rejected = r.rejected;
  out.notes.push_back(kQualitative);
  Table t{"regime", {"beta", "t", "skipped", "corr", "corr_se", "overlap_fraction", "overlap_fraction_se"}, {}};
  for (const auto& row : r.rows) {
    std::vector<std::string> cells{cell(row.beta), cell(row.t), cell(row.skipped)};
    push_estimate(cells, row.corr);
    push_estimate(cells, row.overlap_fraction);
    t.add(cells);
    if (row.skipped) out.warnings.push_back("beta " + format_double(row.beta) + " skipped: beta * t_hat > 1");
  }
  Table s{"regime_summary", {"n", "samples", "rejected", "var", "var_se", "t_hat", "t_hat_se", "all", "all_se"}, {}};
  std::vector<std::string> cells{cell(r.n), cell(r.samples), cell(r.rejected)};
  push_estimate(cells, r.var);
  push_estimate(cells, r.t_hat);
  push_estimate(cells, r.all);
  s.add(cells);
  out.tables = {t, s};
  return out;
}

inline RunOutput run_time_constant(const ExperimentConfig& cfg, const Executor& exec) {
  const IntersectionTable it = intersection_lower_bound(cfg.sim, cfg.n_list, exec);
  RunOutput out;
  out.notes.push_back(kQualitative);
  Table t{"time_constant", {"n", "samples", "rejected", "mu", "mu_se", "relative_change"}, {}};
  Table x{"intersection", {"n", "all_over_n", "all_over_n_se", "overlap_at_one", "overlap_at_one_se"}, {}};
  for (std::size_t i = 0; i < it.rows.size(); ++i) {
    const auto& r = it.rows[i];
    out.samples += r.samples;
    out.rejected += r.rejected;
    const double rel = i ? std::abs(r.mu.value - it.rows[i - 1].mu.value) / it.rows[i - 1].mu.value : 0.0;
    std::vector<std::string> row{cell(r.n), cell(r.samples), cell(r.rejected)};
    push_estimate(row, r.mu);
    row.push_back(i ? cell(rel) : "");
    t.add(row);
    std::vector<std::string> xr{cell(r.n)};
    push_estimate(xr, r.all_over_n);
    push_estimate(xr, r.overlap_at_one);
    x.add(xr);
  }
  Table s{"intersection_summary", {"bounded_away"}, {}};
  s.add({cell(it.bounded_away)});
  out.tables = {t, x, s};
  return out;
}

inline RunOutput run_variance_scaling(const ExperimentConfig& cfg, const Executor& exec) {
  const VarianceTable v = variance_scaling(cfg.sim, cfg.n_list, exec);
  RunOutput out;
  out.notes.push_back(kQualitative);
  Table t{"variance_scaling", {"n", "samples", "rejected", "var", "var_se", "var_over_n", "var_over_n_se"}, {}};
  for (const auto& r : v.rows) {
    out.samples += r.samples;
    out.rejected += r.rejected;
    std::vector<std::string> row{cell(r.n), cell(r.samples), cell(r.rejected)};
    push_estimate(row, r.var);
    push_estimate(row, r.var_over_n);
    t.add(row);
  }
  Table s{"variance_trend", {"var_over_n_decreasing"}, {}};
  s.add({cell(v.var_over_n_decreasing)});
  out.tables = {t, s};
  return out;
}

inline RunOutput run_coincidence(const ExperimentConfig& cfg, const Executor& exec) {
  const CoincidenceReport c = coincidence_rate(cfg.sim, cfg.t, exec);
  RunOutput out;
  out.samples = c.samples;
  out.rejected = c.rejected;
  Table t{"coincidence", {"t", "samples", "rejected", "coincide", "rate", "rate_se"}, {}};
  t.add({cell(cfg.t), cell(c.samples), cell(c.rejected), cell(c.coincide), cell(c.rate.value), cell(c.rate.se)});
  out.tables = {t};
  return out;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"sweep",       "oracle",           "radius",     "animal", "regime",
                                          "time-constant", "variance-scaling", "coincidence"};
  return s;
}

inline RunOutput run_experiment(const std::string& sub, const ExperimentConfig& cfg, const Executor& exec) {
  if (sub == "sweep") return run_sweep(cfg, exec);
  if (sub == "radius") return run_radius(cfg, exec);
  if (sub == "animal") return run_animal(cfg, exec);
  if (sub == "regime") return run_regime(cfg, exec);
  if (sub == "time-constant") return run_time_constant(cfg, exec);
  if (sub == "variance-scaling") return run_variance_scaling(cfg, exec);
  if (sub == "coincidence") return run_coincidence(cfg, exec);
  throw std::invalid_argument("unknown subcommand '" + sub + "'");
}

}  // namespace dynperc

#endif  // DYNPERC_EXPERIMENTS_HPP
