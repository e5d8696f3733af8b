// Acceptance driver: `acceptance --criterion k` runs one criterion and prints
// a single PASS/FAIL line; without arguments every criterion runs in order.
// Exit status is nonzero iff some selected criterion failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynperc/dynperc.hpp"

using namespace dynperc;

namespace {

// Pinned tolerances.
constexpr double kOracleSeconds = 10.0;
constexpr double kGeodesicSeconds = 60.0;
constexpr double kDropSigmas = 2.0;
constexpr double kCovOneSigmas = 3.0;
constexpr double kCoincidenceMin = 0.99;
constexpr double kTailR2Min = 0.9;
constexpr std::int64_t kTailEdgesMin = 10000;
constexpr int kTailCountMin = 30;
constexpr double kAnimalRatioMax = 3.0;
constexpr double kOrderingSigmas = 2.0;  // "within CI" for the orderings of criterion 10
constexpr int kScalingSamples = 2000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using clk = std::chrono::steady_clock;
double seconds_since(clk::time_point t0) { return std::chrono::duration<double>(clk::now() - t0).count(); }

std::string fmt(double x) { return format_double(x); }

std::vector<OracleInstance> oracle_set() {
  std::vector<OracleInstance> v;
  for (int n = 1; n <= 4; ++n)
    for (const mpq_class& p : {mpq_class(1, 2), mpq_class(3, 5)})
      for (std::uint64_t k = 0; k < 5; ++k) {
        OracleInstance in;
        in.n = n;
        in.p = p;
        in.ell = 1;
        in.L = 5;
        in.f = random_table(n, 2024, k);
        v.push_back(in);
      }
  return v;
}

Outcome oracle_exactness() {
  const auto t0 = clk::now();
  const auto set = oracle_set();
  int bad = 0;
  std::string first;
  for (const auto& in : set) {
    const OracleReport r = verify_representation(in);
    if (!r.ok()) {
      ++bad;
      if (first.empty()) first = r.first_failure()->name + ": " + r.first_failure()->detail;
    }
  }
  const double s = seconds_since(t0);
  std::ostringstream os;
  os << set.size() << " instances, " << bad << " failing, " << fmt(s) << " s";
  if (!first.empty()) os << " (" << first << ")";
  return {bad == 0 && set.size() == 40 && s < kOracleSeconds, os.str()};
}

Outcome oracle_russo_monotonicity() {
  int bad = 0, checks = 0;
  std::string first;
  auto take = [&](const OracleReport& r) {
    checks += static_cast<int>(r.checks.size());
    if (!r.ok()) {
      ++bad;
      if (first.empty()) first = r.first_failure()->name + ": " + r.first_failure()->detail;
    }
  };
  for (const auto& in : oracle_set()) {
    take(verify_russo(in));
    std::vector<mpq_class> others;
    for (int j = 0; j < in.n; ++j) others.emplace_back(j + 1, in.n + 1);
    for (int e = 0; e < in.n; ++e) take(verify_monotonicity(in, in.f, e, others));
    OracleReport shape;
    shape.checks.push_back(covariance_shape(covariance_poly(in), 101));
    take(shape);
  }
  std::ostringstream os;
  os << checks << " exact checks, " << bad << " failing reports";
  if (!first.empty()) os << " (" << first << ")";
  return {bad == 0, os.str()};
}

Outcome single_edge() {
  int bad = 0;
  std::ostringstream os;
  for (const mpq_class& p : {mpq_class(1, 2), mpq_class(3, 5), mpq_class(1, 7)})
    for (auto [ell, L] : {std::pair<int, int>{1, 5}, {2, 3}, {0, 9}}) {
      OracleInstance in;
      in.n = 1;
      in.p = p;
      in.ell = ell;
      in.L = L;
      in.f = {mpq_class(L), mpq_class(ell)};  // f(x) = x_e
      const mpq_class c = p * (1 - p) * (L - ell) * (L - ell);
      const Polynomial expect = Polynomial::linear(c, -c);
      if (!(covariance_poly(in) == expect)) {
        ++bad;
        os << "p=" << p.get_str() << " (" << ell << "," << L << "): " << covariance_poly(in).str() << " vs "
           << expect.str() << "; ";
      }
    }
  os << bad << " of 9 cases differ";
  return {bad == 0, os.str()};
}

Outcome geodesic_equivalence() {
  const auto t0 = clk::now();
  const auto lat = std::make_shared<const BoxLattice>(2, 32);
  SearchWorkspace ws;
  const double ps[3] = {0.55, 0.6, 0.7};
  int compared = 0, mismatches = 0, skipped = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    SimulationParams prm;
    prm.p = ps[k % 3];
    prm.side = 32;
    prm.seed = 4;
    const CoupledEnvironment env = sample_environment(lat, prm, k);
    const auto lab = label_clusters(view_at(env, 0.0, WeightMode::chemical, 17));
    if (!lab.has_giant()) {
      ++skipped;
      continue;
    }
    const Vertex a = regularize(*lat, lab, lat->vertex({-12, 0})).target;
    const Vertex b = regularize(*lat, lab, lat->vertex({12, 0})).target;
    for (auto mode : {WeightMode::chemical, WeightMode::truncated}) {
      const auto v = view_at(env, 0.0, mode, 17);
      const auto del = geodesic_summary(v, a, b, ws, AllMethod::deletion);
      const auto cnt = geodesic_summary(v, a, b, ws, AllMethod::counting);
      ++compared;
      mismatches += del.all != cnt.all;
    }
  }
  const double s = seconds_since(t0);
  std::ostringstream os;
  os << compared << " comparisons, " << mismatches << " mismatches, " << skipped << " instances without giant, "
     << fmt(s) << " s";
  return {mismatches == 0 && skipped == 0 && s < kGeodesicSeconds, os.str()};
}

SimulationParams sweep_params(int samples) {
  SimulationParams prm;
  prm.p = 0.6;
  prm.n = 64;
  prm.M = 17;
  prm.seed = 5;
  prm.samples = samples;
  return prm;
}

Outcome overlap_monotonicity() {
  const SweepResult r = sweep(sweep_params(2000));
  bool ok = true;
  std::ostringstream os;
  double worst = INFINITY;
  for (const auto* drops : {&r.overlap_drop_chem, &r.overlap_drop_trunc})
    for (const auto& d : *drops) {
      const double z = d.se > 0 ? d.value / d.se : (d.value >= 0 ? INFINITY : -INFINITY);
      worst = std::min(worst, z);
      if (d.value < -kDropSigmas * d.se) ok = false;
    }
  const bool ends = r.overlap_chem.front().value == r.all_chem.value && r.overlap_trunc.front().value == r.all_trunc.value;
  const Estimate& c1 = r.cov_chem.back();
  const bool indep = std::abs(c1.value) <= kCovOneSigmas * c1.se;
  os << r.samples - r.rejected << " samples; worst drop/se " << fmt(worst) << "; overlap(0)=" << fmt(r.overlap_chem.front().value)
     << " E|all|=" << fmt(r.all_chem.value) << "; Cov(1)=" << fmt(c1.value) << " se " << fmt(c1.se);
  return {ok && ends && indep, os.str()};
}

Outcome coincidence() {
  const CoincidenceReport c = coincidence_rate(sweep_params(1000), 0.0);
  std::ostringstream os;
  os << c.coincide << "/" << c.samples - c.rejected << " coincide, rate " << fmt(c.rate.value) << " se "
     << fmt(c.rate.se) << " (need >= " << fmt(kCoincidenceMin) << ")";
  return {c.rate.value >= kCoincidenceMin, os.str()};
}

Outcome radius_tail() {
  ExperimentConfig cfg;
  cfg.sim.p = 0.6;
  cfg.sim.seed = 7;
  cfg.radius_edges = static_cast<int>(kTailEdgesMin);
  cfg.min_count = kTailCountMin;
  const Executor exec;
  const RadiusTail tail = summarize_radii(sample_radii(cfg, exec), cfg.min_count);
  std::int64_t disagreements = 0, trials = 0;
  std::ostringstream loc;
  for (const auto& r : locality_trials(cfg, exec)) {
    disagreements += r.disagreements;
    trials += r.trials;
    loc << " l=" << r.ell << ":" << r.disagreements << "/" << r.trials;
  }
  const bool fit_ok = tail.fit.points >= 2 && tail.fit.slope < 0 && tail.fit.r2 >= kTailR2Min;
  std::ostringstream os;
  os << tail.edges << " edges (" << tail.overflow << " overflow), fit k=" << tail.fit_lo << ".." << tail.fit_hi
     << " slope " << fmt(tail.fit.slope) << " R2 " << fmt(tail.fit.r2) << "; locality" << loc.str();
  return {fit_ok && tail.edges >= kTailEdgesMin && disagreements == 0 && trials == 1500, os.str()};
}

Outcome bypass() {
  SimulationParams sim;
  sim.p = 0.6;
  sim.n = 32;
  sim.seed = 8;
  const int bound = 8 * sim.d;
  const BypassTotals b = bypass_run(sim, 500, 0.3, bound, Executor{});
  // all-open box: every detour around a geodesic edge costs 8 extra edges at r = 1
  const auto lat = std::make_shared<const BoxLattice>(2, 30);
  const auto env = CoupledEnvironment::constant(lat, true, true);
  RadiusWorkspace ws;
  const RadiusParams rp{16, 17, 1 << 20};
  const auto s = geodesic_summary(view_at(env, 0.0, WeightMode::truncated, rp.M), lat->vertex({-10, 0}),
                                  lat->vertex({10, 0}), ws.search);
  const BypassReport forced = verify_bypass(env, 0.0, s, rp, 4, ws);
  std::ostringstream os;
  os << "C*=" << bound << ": " << b.violations << " violations in " << b.checked << " edges (" << b.skipped
     << " near endpoints, " << b.overflow << " overflow, " << b.rejected << " rejected); forced C*=4: "
     << forced.violations << "/" << forced.checked << " flagged";
  return {b.violations == 0 && b.checked > 0 && forced.checked > 0 && forced.violations > 0, os.str()};
}

Outcome animal_shape() {
  ExperimentConfig cfg;
  cfg.sim.seed = 9;
  cfg.sim.samples = 40;
  const auto rows = animal_table(cfg, Executor{});
  bool ok = true;
  std::ostringstream os;
  for (int N : cfg.animal_N) {
    double lo = INFINITY, hi = 0;
    bool exact = true;
    for (const auto& r : rows)
      if (r.N == N) {
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
        exact = exact && r.exact;
      }
    const double q = hi / lo;
    ok = ok && exact && lo > 0 && q <= kAnimalRatioMax;
    os << "N=" << N << " max/min " << fmt(q) << (exact ? "" : " (inexact)") << "; ";
  }
  return {ok, os.str()};
}

Outcome variance_chaos() {
  SimulationParams prm;
  prm.p = 0.6;
  prm.seed = 10;
  prm.samples = kScalingSamples;
  const ScalingRow small = scaling_row(prm, 32, false, Executor{});
  const ScalingRow large = scaling_row(prm, 256, false, Executor{});
  auto below = [](const Estimate& a, const Estimate& b) {  // a < b by kOrderingSigmas combined se
    return b.value - a.value > kOrderingSigmas * std::hypot(a.se, b.se);
  };
  const bool var_ok = below(large.var_over_n, small.var_over_n);
  prm.n = 256;
  prm.side = 0;
  prm.M = 0;
  const RegimeReport rr = regime_sweep(prm, {0.1, 10.0});
  const RegimeRow& lo = rr.rows[0];
  const RegimeRow& hi = rr.rows[1];
  bool chaos_ok = !lo.skipped && !hi.skipped;
  if (chaos_ok) chaos_ok = below(hi.corr, lo.corr) && below(hi.overlap_fraction, lo.overlap_fraction);
  std::ostringstream os;
  os << "Var/n n=32 " << fmt(small.var_over_n.value) << " se " << fmt(small.var_over_n.se) << ", n=256 "
     << fmt(large.var_over_n.value) << " se " << fmt(large.var_over_n.se) << "; t_hat(256)=" << fmt(rr.t_hat.value);
  for (const auto& r : rr.rows) {
    os << "; beta=" << fmt(r.beta) << " t=" << fmt(r.t);
    if (r.skipped) os << " skipped (t > 1)";
    else os << " corr " << fmt(r.corr.value) << " overlap frac " << fmt(r.overlap_fraction.value);
  }
  return {var_ok && chaos_ok, os.str()};
}

std::string render(const RunOutput& out, const std::string& sub, const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const auto& t : out.tables) write_csv(os, t, sub, echo(cfg));
  return os.str();
}

Outcome determinism() {
  ExperimentConfig cfg;
  cfg.sim.n = 24;
  cfg.sim.samples = 24;
  cfg.sim.seed = 11;
  cfg.n_list = {16, 24};
  cfg.radius_side = 60;
  cfg.radius_edges = 60;
  cfg.radius_per_sample = 20;
  cfg.radius_spread = 10;
  cfg.locality_trials = 6;
  cfg.animal_L = {4, 5};
  cfg.moment_n = {12};
  cfg.moment_samples = 4;
  int differing = 0;
  std::ostringstream os;
  {
    const OracleConfig oc;
    std::ostringstream a, b;
    for (const auto& t : run_oracle(oc).tables) write_csv(a, t, "oracle", echo(oc));
    for (const auto& t : run_oracle(oc).tables) write_csv(b, t, "oracle", echo(oc));
    if (a.str() != b.str()) {
      ++differing;
      os << "oracle differs; ";
    }
  }
  for (const auto& sub : subcommands()) {
    if (sub == "oracle") continue;
    const std::string a = render(run_experiment(sub, cfg, Executor{1}), sub, cfg);
    const std::string b = render(run_experiment(sub, cfg, Executor{3}), sub, cfg);
    const std::string c = render(run_experiment(sub, cfg, Executor{1}), sub, cfg);
    if (a != b || a != c || a.empty()) {
      ++differing;
      os << sub << " differs; ";
    }
  }
  os << subcommands().size() << " subcommands, " << differing << " with differing output (workers 1, 3, rerun)";
  return {differing == 0, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c{
      {1, "oracle exactness", oracle_exactness},
      {2, "oracle russo and monotonicity", oracle_russo_monotonicity},
      {3, "single-edge closed form", single_edge},
      {4, "geodesic-set oracle equivalence", geodesic_equivalence},
      {5, "overlap monotonicity", overlap_monotonicity},
      {6, "coincidence rate", coincidence},
      {7, "radius tail and locality", radius_tail},
      {8, "bypass property", bypass},
      {9, "animal bound shape", animal_shape},
      {10, "variance and chaos orderings", variance_chaos},
      {11, "determinism", determinism},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  bool all_ok = true;
  for (const auto& c : criteria()) {
    if (only && c.id != only) continue;
    const auto t0 = clk::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    all_ok = all_ok && o.pass;
  }
  return all_ok ? 0 : 1;
}
