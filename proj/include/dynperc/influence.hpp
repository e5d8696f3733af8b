#ifndef DYNPERC_INFLUENCE_HPP
#define DYNPERC_INFLUENCE_HPP

#include <algorithm>
#include <cstdint>
#include <optional>

#include "dynperc/geodesics.hpp"
#include "dynperc/percolation.hpp"
#include "dynperc/rng.hpp"

namespace dynperc {

// A passage-time difference. Chemical distances can be infinite under an
// override; such values are flagged rather than given a number.
struct DerivativeValue {
  bool defined = true;
  std::int64_t value = 0;
};

struct OverrideOutcome {
  RegularizedPoint a, b;
  Dist value = kUnreachable;
};

// T̃ ∘ σ_e^w in the view's mode: endpoints regularized in the overridden view.
inline OverrideOutcome value_under(const EnvironmentView& view, EdgeId e, int w, Vertex z0, Vertex z1,
                                   SearchWorkspace& ws) {
  const EnvironmentView over = view.override(e, w);
  const ClusterLabeling lab = label_clusters(over.with_mode(WeightMode::chemical));
  if (!lab.has_giant()) throw NoGiantCluster();
  OverrideOutcome out;
  out.a = regularize(over.lattice(), lab, z0);
  out.b = regularize(over.lattice(), lab, z1);
  out.value = point_distance(over, out.a.target, out.b.target, ws);
  return out;
}

// Reference implementation: two full recomputations.
inline DerivativeValue discrete_derivative(const EnvironmentView& view, int a, int b, EdgeId e, Vertex z0,
                                           Vertex z1, SearchWorkspace& ws) {
  if (a == b) {
    if (!view.valid_weight(a)) throw std::invalid_argument("discrete_derivative: invalid weight");
    return {true, 0};
  }
  const Dist x = value_under(view, e, a, z0, z1, ws).value;
  const Dist y = value_under(view, e, b, z0, z1, ws).value;
  if (x == kUnreachable || y == kUnreachable) return {false, 0};
  return {true, static_cast<std::int64_t>(x) - y};
}

// Truncated passage time between regularized endpoints in one view, answering
// single-edge overrides mostly from the forward/backward fields. When the
// override leaves both regularized endpoints in place:
//   opening a closed edge:          min(D, fa[u] + 1 + fb[v], fa[v] + 1 + fb[u])
//   closing an open edge not in π̃: D (a geodesic avoids it)
//   closing an open edge in π̃:     min(D without e, D + M - 1)
// Otherwise the problem is solved again from the new endpoints.
class PassageEngine {
public:
  PassageEngine(const EnvironmentView& truncated_view, Vertex z0, Vertex z1, SearchWorkspace& ws)
      : view_(truncated_view),
        chem_(truncated_view.with_mode(WeightMode::chemical)),
        lab_(label_clusters(chem_)),
        flip_(chem_, lab_),
        z0_(z0),
        z1_(z1),
        ws_(ws) {
    if (view_.mode() != WeightMode::truncated) throw std::invalid_argument("PassageEngine: truncated view required");
    if (!lab_.has_giant()) throw NoGiantCluster();
    a_ = flip_.base(z0);
    b_ = flip_.base(z1);
    summary_ = geodesic_summary(view_, a_.target, b_.target, ws_);
  }
  PassageEngine(const PassageEngine&) = delete;
  PassageEngine& operator=(const PassageEngine&) = delete;

  const EnvironmentView& view() const { return view_; }
  const ClusterLabeling& labeling() const { return lab_; }
  const GeodesicSummary& summary() const { return summary_; }
  const RegularizedPoint& start() const { return a_; }
  const RegularizedPoint& end() const { return b_; }
  Dist distance() const { return summary_.distance; }
  std::int64_t full_recomputes() const { return full_; }

  struct Endpoints {
    Vertex a, b;
    bool operator==(const Endpoints&) const = default;
  };

  Endpoints endpoints_under(EdgeId e, bool open_state) const {
    const auto ra = flip_.regularize(e, open_state, z0_);
    const auto rb = flip_.regularize(e, open_state, z1_);
    if (!ra || !rb) throw NoGiantCluster();
    return {ra->target, rb->target};
  }

  // 𝒬_e: the regularized endpoints do not depend on the state of e.
  bool endpoints_stable(EdgeId e) const { return endpoints_under(e, true) == endpoints_under(e, false); }

  Dist value(EdgeId e, bool open_state) {
    const Endpoints ends = endpoints_under(e, open_state);
    if (ends.a != a_.target || ends.b != b_.target) {
      ++full_;
      return point_distance(view_.with_state(e, open_state), ends.a, ends.b, ws_);
    }
    const Dist D = summary_.distance;
    if (view_.open(e) == open_state) return D;
    const auto [u, v] = view_.lattice().endpoints(e);
    const auto& fa = summary_.from_a;
    const auto& fb = summary_.from_b;
    if (open_state) {
      const std::int64_t via = std::min(static_cast<std::int64_t>(fa[u]) + 1 + fb[v],
                                        static_cast<std::int64_t>(fa[v]) + 1 + fb[u]);
      return static_cast<Dist>(std::min<std::int64_t>(D, via));
    }
    if (!summary_.in_all(e)) return D;
    const Dist through = D + view_.truncation() - 1;
    auto base = search_weight(view_);
    const Vertex src[1] = {a_.target};
    const Dist avoid = dial_search(view_.lattice(), ws_, src, view_.max_finite_weight(),
                                   [&](EdgeId f) { return f == e ? -1 : base(f); }, everywhere, through - 1,
                                   b_.target);
    return std::min(avoid, through);
  }

  // ∇_e^{M,1}
  std::int64_t derivative(EdgeId e) {
    return static_cast<std::int64_t>(value(e, false)) - value(e, true);
  }

private:
  EnvironmentView view_;
  EnvironmentView chem_;
  ClusterLabeling lab_;
  EdgeFlipRegularizer flip_;
  Vertex z0_, z1_;
  SearchWorkspace& ws_;
  RegularizedPoint a_, b_;
  GeodesicSummary summary_;
  std::int64_t full_ = 0;
};

struct InfluenceRecord {
  EdgeId e = kNoEdge;
  double t = 0.0;
  std::int64_t grad0 = 0;  // ∇^{M,1} T̃_M
  std::int64_t gradt = 0;  // ∇^{M,1} T̃^t_M
  std::int64_t inf = 0;    // grad0 * gradt
  std::int64_t delta = 0;  // Δ_e for the sampled (τ, τ^1, τ^2)
  bool q0 = false, qt = false;
  bool tau_open = false, tau_t_open = false;  // τ_e = 1, τ_e(t) = 1
  bool tau1_open = false, tau2_open = false;
  bool in_all0 = false, in_allt = false;
};

// Fresh per-(sample, edge) draws for the two extra copies ω^1_e, ω^2_e.
inline std::pair<bool, bool> coderivative_draws(std::uint64_t seed, std::uint64_t sample, EdgeId e, double p) {
  const Threshold h = threshold_for(p);
  return {h.passes(keyed_u64(seed, StreamTag::coderivative_first, sample, static_cast<std::uint64_t>(e))),
          h.passes(keyed_u64(seed, StreamTag::coderivative_second, sample, static_cast<std::uint64_t>(e)))};
}

inline InfluenceRecord co_influence(PassageEngine& at0, PassageEngine& att, EdgeId e, bool tau1_open,
                                    bool tau2_open) {
  InfluenceRecord r;
  r.e = e;
  r.t = att.view().t();
  r.tau_open = at0.view().open(e);
  r.tau_t_open = att.view().open(e);
  r.tau1_open = tau1_open;
  r.tau2_open = tau2_open;
  r.q0 = at0.endpoints_stable(e);
  r.qt = att.endpoints_stable(e);
  r.in_all0 = at0.summary().in_all(e);
  r.in_allt = att.summary().in_all(e);
  r.grad0 = at0.derivative(e);
  r.gradt = att.derivative(e);
  r.inf = r.grad0 * r.gradt;
  const std::int64_t d1 = static_cast<std::int64_t>(at0.value(e, r.tau_open)) - at0.value(e, tau1_open);
  const std::int64_t d2 = static_cast<std::int64_t>(att.value(e, r.tau_open)) - att.value(e, tau2_open);
  r.delta = d1 * d2;
  return r;
}

inline InfluenceRecord co_influence(const CoupledEnvironment& env, EdgeId e, double t, int M, Vertex z0,
                                    Vertex z1, std::uint64_t seed, double p, SearchWorkspace& ws) {
  PassageEngine at0(view_at(env, 0.0, WeightMode::truncated, M), z0, z1, ws);
  PassageEngine att(view_at(env, t, WeightMode::truncated, M), z0, z1, ws);
  const auto [o1, o2] = coderivative_draws(seed, env.sample_index(), e, p);
  return co_influence(at0, att, e, o1, o2);
}

struct CoinfluenceTotals {
  std::int64_t sum_inf = 0;        // Σ_e Inf_e over the filter
  std::int64_t overlap = 0;        // |π̃_M ∩ π̃^t_M|
  std::int64_t edges = 0;
  std::int64_t unstable = 0;       // edges outside 𝒬_e^0 ∩ 𝒬_e^t among pivotal ones
  std::int64_t full_recomputes = 0;
};

// One sample's contribution to Σ_e E[Inf_e] restricted to `window`.
inline CoinfluenceTotals total_coinfluence(const CoupledEnvironment& env, double t, int M, Vertex z0, Vertex z1,
                                           const Box& window, SearchWorkspace& ws) {
  PassageEngine at0(view_at(env, 0.0, WeightMode::truncated, M), z0, z1, ws);
  PassageEngine att(view_at(env, t, WeightMode::truncated, M), z0, z1, ws);
  const BoxLattice& lat = env.lattice();
  CoinfluenceTotals tot;
  tot.overlap = overlap(at0.summary(), att.summary());
  lat.for_each_vertex(window, [&](Vertex x) {
    for (int a = 0; a < lat.dim(); ++a) {
      const EdgeId e = lat.edge_up(x, a);
      if (e == kNoEdge || lat.coord(x, a) + 1 > window.hi[a]) continue;
      ++tot.edges;
      const std::int64_t g0 = at0.derivative(e);
      if (g0 == 0) continue;
      const std::int64_t gt = att.derivative(e);
      if (gt == 0) continue;
      tot.sum_inf += g0 * gt;
      if (!at0.endpoints_stable(e) || !att.endpoints_stable(e)) ++tot.unstable;
    }
  });
  tot.full_recomputes = at0.full_recomputes() + att.full_recomputes();
  return tot;
}

}  // namespace dynperc

#endif  // DYNPERC_INFLUENCE_HPP
