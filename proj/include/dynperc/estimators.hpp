#ifndef DYNPERC_ESTIMATORS_HPP
#define DYNPERC_ESTIMATORS_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynperc/geodesics.hpp"
#include "dynperc/parallel.hpp"
#include "dynperc/percolation.hpp"
#include "dynperc/statistics.hpp"

namespace dynperc {

class AggregateFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxRejectionRate = 0.10;

struct Endpoints {
  Vertex z0 = kNoVertex, z1 = kNoVertex;
};

inline Endpoints endpoints_for(const BoxLattice& lat, const SimulationParams& prm) {
  return {lat.vertex(prm.origin()), lat.vertex(prm.target())};
}

inline std::shared_ptr<const BoxLattice> lattice_for(const SimulationParams& prm) {
  return std::make_shared<const BoxLattice>(prm.d, prm.box_side());
}

// Geodesic summaries at one noise level, both modes, on the endpoints
// regularized in the chemical view at that level.
struct NoiseLevel {
  GeodesicSummary chem, trunc;
};

inline NoiseLevel summaries_at(const CoupledEnvironment& env, double t, int M, const Endpoints& z, SearchWorkspace& ws,
                               bool truncated = true) {
  const EnvironmentView chem = view_at(env, t, WeightMode::chemical, M);
  const ClusterLabeling lab = label_clusters(chem);
  if (!lab.has_giant()) throw NoGiantCluster();
  const auto ends = regularized_endpoints(env.lattice(), lab, z.z0, z.z1);
  NoiseLevel out;
  out.chem = geodesic_summary(chem, ends.a.target, ends.b.target, ws);
  if (truncated) out.trunc = geodesic_summary(view_at(env, t, WeightMode::truncated, M), ends.a.target, ends.b.target, ws);
  return out;
}

struct SweepSample {
  bool rejected = false;
  std::uint64_t generation = 0;
  // one entry per t in the grid
  std::vector<double> chem, trunc;                   // D̃^t, T̃^t_M
  std::vector<double> overlap_chem, overlap_trunc;   // |π̃ ∩ π̃^t|, |π̃_M ∩ π̃^t_M|
  std::vector<double> all_chem, all_trunc;           // |π̃^t|, |π̃^t_M|
  std::vector<double> coincide;                      // 1 when both modes give the same geodesic sets
};

inline SweepSample sweep_sample(const std::shared_ptr<const BoxLattice>& lat, const SimulationParams& prm,
                                std::uint64_t k, SearchWorkspace& ws) {
  const CoupledEnvironment env = sample_environment(lat, prm, k);
  const Endpoints z = endpoints_for(*lat, prm);
  const int M = prm.truncation();
  SweepSample s;
  s.generation = env.generation();
  try {
    std::optional<NoiseLevel> base;
    for (double t : prm.t_grid) {
      NoiseLevel lv = summaries_at(env, t, M, z, ws);
      if (!base) base = lv;
      s.chem.push_back(lv.chem.distance);
      s.trunc.push_back(lv.trunc.distance);
      s.overlap_chem.push_back(static_cast<double>(overlap(base->chem, lv.chem)));
      s.overlap_trunc.push_back(static_cast<double>(overlap(base->trunc, lv.trunc)));
      s.all_chem.push_back(static_cast<double>(lv.chem.all.size()));
      s.all_trunc.push_back(static_cast<double>(lv.trunc.all.size()));
      const bool same = lv.chem.distance == lv.trunc.distance && lv.chem.some == lv.trunc.some &&
                        lv.chem.all == lv.trunc.all;
      s.coincide.push_back(same ? 1.0 : 0.0);
    }
  } catch (const NoGiantCluster&) {
    s = SweepSample{};
    s.rejected = true;
  }
  return s;
}

struct SweepResult {
  std::vector<double> t;
  std::int64_t samples = 0, rejected = 0;
  Estimate var_chem, var_trunc, all_chem, all_trunc;
  std::vector<Estimate> mean_chem, mean_trunc;
  std::vector<Estimate> cov_chem, cov_trunc, corr_chem;
  std::vector<Estimate> overlap_chem, overlap_trunc;
  std::vector<Estimate> overlap_drop_chem, overlap_drop_trunc;  // overlap(t_i) − overlap(t_{i+1})
  std::vector<Estimate> coincidence;
};

inline void check_rejections(std::int64_t rejected, std::int64_t total) {
  if (total > 0 && static_cast<double>(rejected) > kMaxRejectionRate * static_cast<double>(total))
    throw AggregateFailure("rejection rate " + std::to_string(rejected) + "/" + std::to_string(total) +
                           " exceeds 10%: parameters too close to criticality for the box");
}

// Column j of the accepted samples.
template <class Member>
std::vector<double> column(const std::vector<SweepSample>& xs, Member m, std::size_t j) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& s : xs)
    if (!s.rejected) out.push_back((s.*m)[j]);
  return out;
}

inline SweepResult aggregate_sweep(const SimulationParams& prm, const std::vector<SweepSample>& xs) {
  SweepResult r;
  r.t = prm.t_grid;
  r.samples = static_cast<std::int64_t>(xs.size());
  for (const auto& s : xs) r.rejected += s.rejected;
  check_rejections(r.rejected, r.samples);
  const auto d0 = column(xs, &SweepSample::chem, 0), m0 = column(xs, &SweepSample::trunc, 0);
  r.var_chem = variance_estimate(d0);
  r.var_trunc = variance_estimate(m0);
  r.all_chem = mean_estimate(column(xs, &SweepSample::all_chem, 0));
  r.all_trunc = mean_estimate(column(xs, &SweepSample::all_trunc, 0));
  const bool has_var = r.var_chem.value > 0;
  for (std::size_t j = 0; j < r.t.size(); ++j) {
    const auto dj = column(xs, &SweepSample::chem, j), mj = column(xs, &SweepSample::trunc, j);
    r.mean_chem.push_back(mean_estimate(dj));
    r.mean_trunc.push_back(mean_estimate(mj));
    r.cov_chem.push_back(covariance_estimate(d0, dj));
    r.cov_trunc.push_back(covariance_estimate(m0, mj));
    r.corr_chem.push_back(has_var ? correlation_estimate(d0, dj) : Estimate{});
    r.overlap_chem.push_back(mean_estimate(column(xs, &SweepSample::overlap_chem, j)));
    r.overlap_trunc.push_back(mean_estimate(column(xs, &SweepSample::overlap_trunc, j)));
    r.coincidence.push_back(mean_estimate(column(xs, &SweepSample::coincide, j)));
    if (j + 1 < r.t.size()) {
      r.overlap_drop_chem.push_back(paired_difference(column(xs, &SweepSample::overlap_chem, j),
                                                      column(xs, &SweepSample::overlap_chem, j + 1)));
      r.overlap_drop_trunc.push_back(paired_difference(column(xs, &SweepSample::overlap_trunc, j),
                                                       column(xs, &SweepSample::overlap_trunc, j + 1)));
    }
  }
  return r;
}

inline std::vector<SweepSample> sweep_samples(const SimulationParams& prm, const Executor& exec) {
  validate(prm);
  if (prm.t_grid.empty() || prm.t_grid.front() != 0.0 || prm.t_grid.back() != 1.0)
    throw ParamError("t_grid: must start at 0 and end at 1");
  const auto lat = lattice_for(prm);
  std::vector<SweepSample> xs(static_cast<std::size_t>(prm.samples));
  std::vector<SearchWorkspace> ws(static_cast<std::size_t>(exec.workers));
  exec.run(xs.size(), [&](std::size_t i, int w) { xs[i] = sweep_sample(lat, prm, i, ws[static_cast<std::size_t>(w)]); });
  return xs;
}

inline SweepResult sweep(const SimulationParams& prm, const Executor& exec = {}) {
  return aggregate_sweep(prm, sweep_samples(prm, exec));
}

struct OverlapIntegral {
  double trapezoid = 0.0;
  bool bracketed = false;
  double lower = 0.0, upper = 0.0;  // Riemann sums of a non-increasing integrand
  std::string warning;
};

// Trapezoid value plus the monotone bracket. If some adjacent increase
// exceeds k standard errors of the paired drop, the bracket is dropped.
inline OverlapIntegral overlap_integral(const std::vector<double>& t, const std::vector<double>& v,
                                        const std::vector<Estimate>& drops = {}, double k = 2.0) {
  if (t.size() != v.size() || t.size() < 2) throw std::invalid_argument("overlap_integral: need matching series");
  OverlapIntegral r;
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double h = t[i + 1] - t[i];
    if (h < 0) throw std::invalid_argument("overlap_integral: grid must be sorted");
    r.trapezoid += 0.5 * h * (v[i] + v[i + 1]);
    r.upper += h * std::max(v[i], v[i + 1]);
    r.lower += h * std::min(v[i], v[i + 1]);
    if (v[i + 1] > v[i]) {
      const double se = i < drops.size() ? drops[i].se : 0.0;
      if (v[i + 1] - v[i] > k * se) monotone = false;
    }
  }
  r.bracketed = monotone;
  if (!monotone) {
    r.warning = "series increases beyond its error band; bracket dropped";
    r.lower = r.upper = 0.0;
  }
  return r;
}

struct RegimeRow {
  double beta = 0.0, t = 0.0;
  bool skipped = false;
  Estimate corr, overlap_fraction;
};

struct RegimeReport {
  int n = 0;
  std::int64_t samples = 0, rejected = 0;
  Estimate var, t_hat, all;
  std::vector<RegimeRow> rows;
};

// Two passes over one sample pool: t̂_n = Var(D̃)/n from the first, then Corr
// and the overlap fraction E|π̃ ∩ π̃^t| / E|π̃| at t = β t̂_n.
inline RegimeReport regime_sweep(const SimulationParams& prm, const std::vector<double>& betas,
                                 const Executor& exec = {}) {
  validate(prm);
  const auto lat = lattice_for(prm);
  const Endpoints z = endpoints_for(*lat, prm);
  const int M = prm.truncation();
  const std::size_t n = static_cast<std::size_t>(prm.samples);
  std::vector<SearchWorkspace> ws(static_cast<std::size_t>(exec.workers));
  std::vector<double> d0(n), all0(n);
  std::vector<char> bad(n, 0);
  exec.run(n, [&](std::size_t i, int w) {
    const CoupledEnvironment env = sample_environment(lat, prm, i);
    try {
      const auto lv = summaries_at(env, 0.0, M, z, ws[static_cast<std::size_t>(w)], false);
      d0[i] = lv.chem.distance;
      all0[i] = static_cast<double>(lv.chem.all.size());
    } catch (const NoGiantCluster&) {
      bad[i] = 1;
    }
  });
  RegimeReport rep;
  rep.n = prm.n;
  rep.samples = static_cast<std::int64_t>(n);
  std::vector<double> pool;
  for (std::size_t i = 0; i < n; ++i)
    if (!bad[i]) pool.push_back(d0[i]);
  check_rejections(static_cast<std::int64_t>(n - pool.size()), rep.samples);
  const Estimate var1 = variance_estimate(pool);
  const double t_hat = var1.value / prm.n;
  std::vector<double> ts;
  for (double b : betas) {
    RegimeRow row;
    row.beta = b;
    row.t = b * t_hat;
    row.skipped = !(row.t <= 1.0);
    rep.rows.push_back(row);
    if (!row.skipped) ts.push_back(row.t);
  }
  std::vector<std::vector<double>> dt(n, std::vector<double>(ts.size())), ov(n, std::vector<double>(ts.size()));
  exec.run(n, [&](std::size_t i, int w) {
    if (bad[i]) return;
    auto& wsw = ws[static_cast<std::size_t>(w)];
    const CoupledEnvironment env = sample_environment(lat, prm, i);
    try {
      const auto base = summaries_at(env, 0.0, M, z, wsw, false);
      for (std::size_t j = 0; j < ts.size(); ++j) {
        const auto lv = summaries_at(env, ts[j], M, z, wsw, false);
        dt[i][j] = lv.chem.distance;
        ov[i][j] = static_cast<double>(overlap(base.chem, lv.chem));
      }
    } catch (const NoGiantCluster&) {
      bad[i] = 1;
    }
  });
  std::vector<double> x, a;
  std::vector<std::vector<double>> y(ts.size()), o(ts.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (bad[i]) continue;
    x.push_back(d0[i]);
    a.push_back(all0[i]);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      y[j].push_back(dt[i][j]);
      o[j].push_back(ov[i][j]);
    }
  }
  rep.rejected = static_cast<std::int64_t>(n - x.size());
  check_rejections(rep.rejected, rep.samples);
  rep.var = variance_estimate(x);
  rep.t_hat = batch_statistic(x.size(), [&](std::size_t lo, std::size_t hi) { return cov_of(x, x, lo, hi) / prm.n; });
  rep.all = mean_estimate(a);
  std::size_t j = 0;
  for (auto& row : rep.rows) {
    if (row.skipped) continue;
    row.corr = correlation_estimate(x, y[j]);
    const auto& oj = o[j];
    row.overlap_fraction = batch_statistic(x.size(), [&](std::size_t lo, std::size_t hi) {
      const double den = mean_of(a, lo, hi);
      return den > 0 ? mean_of(oj, lo, hi) / den : 0.0;
    });
    ++j;
  }
  return rep;
}

// Per-sample chemical quantities at t = 0 (and |π̃ ∩ π̃^1| when asked).
struct ScalingRow {
  int n = 0;
  std::int64_t samples = 0, rejected = 0;
  Estimate mean_distance, var, var_over_n, mu, all_over_n, overlap_at_one;
};

inline ScalingRow scaling_row(SimulationParams prm, int n, bool with_t1, const Executor& exec) {
  prm.n = n;
  prm.side = 0;
  prm.M = 0;
  validate(prm);
  const auto lat = lattice_for(prm);
  const Endpoints z = endpoints_for(*lat, prm);
  const int M = prm.truncation();
  const std::size_t count = static_cast<std::size_t>(prm.samples);
  std::vector<double> d(count), all(count), ov(count);
  std::vector<char> bad(count, 0);
  std::vector<SearchWorkspace> ws(static_cast<std::size_t>(exec.workers));
  exec.run(count, [&](std::size_t i, int w) {
    auto& wsw = ws[static_cast<std::size_t>(w)];
    const CoupledEnvironment env = sample_environment(lat, prm, i);
    try {
      const auto lv = summaries_at(env, 0.0, M, z, wsw, false);
      d[i] = lv.chem.distance;
      all[i] = static_cast<double>(lv.chem.all.size());
      if (with_t1) ov[i] = static_cast<double>(overlap(lv.chem, summaries_at(env, 1.0, M, z, wsw, false).chem));
    } catch (const NoGiantCluster&) {
      bad[i] = 1;
    }
  });
  std::vector<double> x, a, o;
  for (std::size_t i = 0; i < count; ++i)
    if (!bad[i]) {
      x.push_back(d[i]);
      a.push_back(all[i]);
      o.push_back(ov[i]);
    }
  ScalingRow r;
  r.n = n;
  r.samples = static_cast<std::int64_t>(count);
  r.rejected = static_cast<std::int64_t>(count - x.size());
  check_rejections(r.rejected, r.samples);
  const double nn = n;
  r.mean_distance = mean_estimate(x);
  r.var = variance_estimate(x);
  r.var_over_n = batch_statistic(x.size(), [&](std::size_t lo, std::size_t hi) { return cov_of(x, x, lo, hi) / nn; });
  r.mu = batch_statistic(x.size(), [&](std::size_t lo, std::size_t hi) { return mean_of(x, lo, hi) / nn; });
  r.all_over_n = batch_statistic(a.size(), [&](std::size_t lo, std::size_t hi) { return mean_of(a, lo, hi) / nn; });
  if (with_t1) r.overlap_at_one = mean_estimate(o);
  return r;
}

struct TimeConstantTable {
  std::vector<ScalingRow> rows;
  std::vector<double> relative_change;  // |μ_{k+1} − μ_k| / μ_k
};

inline TimeConstantTable time_constant(const SimulationParams& prm, const std::vector<int>& ns,
                                       const Executor& exec = {}) {
  TimeConstantTable t;
  for (int n : ns) t.rows.push_back(scaling_row(prm, n, false, exec));
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i)
    t.relative_change.push_back(std::abs(t.rows[i + 1].mu.value - t.rows[i].mu.value) / t.rows[i].mu.value);
  return t;
}

struct VarianceTable {
  std::vector<ScalingRow> rows;
  bool var_over_n_decreasing = false;  // point estimates only
};

inline VarianceTable variance_scaling(const SimulationParams& prm, const std::vector<int>& ns,
                                      const Executor& exec = {}) {
  VarianceTable t;
  for (int n : ns) t.rows.push_back(scaling_row(prm, n, false, exec));
  t.var_over_n_decreasing = true;
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i)
    if (!(t.rows[i + 1].var_over_n.value < t.rows[i].var_over_n.value)) t.var_over_n_decreasing = false;
  return t;
}

struct IntersectionTable {
  std::vector<ScalingRow> rows;
  bool bounded_away = false;  // every E|π̃|/n lower 2σ end positive and max/min ≤ 2
};

inline IntersectionTable intersection_lower_bound(const SimulationParams& prm, const std::vector<int>& ns,
                                                  const Executor& exec = {}) {
  IntersectionTable t;
  for (int n : ns) t.rows.push_back(scaling_row(prm, n, true, exec));
  double lo = INFINITY, hi = 0;
  bool positive = true;
  for (const auto& r : t.rows) {
    lo = std::min(lo, r.all_over_n.value);
    hi = std::max(hi, r.all_over_n.value);
    positive = positive && r.all_over_n.lo(2) > 0;
  }
  t.bounded_away = !t.rows.empty() && positive && hi <= 2 * lo;
  return t;
}

struct CoincidenceReport {
  std::int64_t samples = 0, rejected = 0, coincide = 0;
  Estimate rate;
};

inline CoincidenceReport coincidence_rate(const SimulationParams& prm, double t, const Executor& exec = {}) {
  validate(prm);
  const auto lat = lattice_for(prm);
  const Endpoints z = endpoints_for(*lat, prm);
  const std::size_t n = static_cast<std::size_t>(prm.samples);
  std::vector<double> hit(n, 0.0);
  std::vector<char> bad(n, 0);
  std::vector<SearchWorkspace> ws(static_cast<std::size_t>(exec.workers));
  exec.run(n, [&](std::size_t i, int w) {
    const CoupledEnvironment env = sample_environment(lat, prm, i);
    try {
      hit[i] = compare_geodesic_sets(env, t, prm.truncation(), z.z0, z.z1, ws[static_cast<std::size_t>(w)]).coincide;
    } catch (const NoGiantCluster&) {
      bad[i] = 1;
    }
  });
  CoincidenceReport r;
  r.samples = static_cast<std::int64_t>(n);
  std::vector<double> x;
  for (std::size_t i = 0; i < n; ++i)
    if (!bad[i]) x.push_back(hit[i]);
  r.rejected = static_cast<std::int64_t>(n - x.size());
  check_rejections(r.rejected, r.samples);
  for (double h : x) r.coincide += h > 0;
  r.rate = mean_estimate(x);
  return r;
}

}  // namespace dynperc

#endif  // DYNPERC_ESTIMATORS_HPP
