#ifndef DYNPERC_GEODESICS_HPP
#define DYNPERC_GEODESICS_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dynperc/environment.hpp"
#include "dynperc/percolation.hpp"
#include "dynperc/search.hpp"

namespace dynperc {

class Unreachable : public std::runtime_error {
public:
  Unreachable() : std::runtime_error("endpoints are not connected in this view") {}
};

class GenerationMismatch : public std::invalid_argument {
public:
  GenerationMismatch() : std::invalid_argument("summaries come from different environments") {}
};

// Weight accessor for the engine: -1 marks an absent (closed, chemical) edge.
inline auto search_weight(const EnvironmentView& view) {
  return [&view](EdgeId e) {
    if (view.open(e)) return 1;
    return view.mode() == WeightMode::chemical ? -1 : view.truncation();
  };
}

struct DistanceField {
  Vertex source = kNoVertex;
  WeightMode mode = WeightMode::chemical;
  double t = 0.0;
  std::uint64_t generation = 0;
  std::vector<Dist> dist;

  Dist operator[](Vertex v) const { return dist[v]; }
  bool reachable(Vertex v) const { return dist[v] != kUnreachable; }
};

inline DistanceField distance_field(const EnvironmentView& view, Vertex source, SearchWorkspace& ws) {
  const BoxLattice& lat = view.lattice();
  if (source < 0 || source >= lat.num_vertices()) throw std::out_of_range("distance_field: source outside box");
  const Vertex src[1] = {source};
  dial_search(lat, ws, src, view.max_finite_weight(), search_weight(view), everywhere);
  DistanceField f{source, view.mode(), view.t(), view.generation(), {}};
  f.dist.resize(static_cast<std::size_t>(lat.num_vertices()));
  for (Vertex v = 0; v < lat.num_vertices(); ++v) f.dist[v] = ws.get(v);
  return f;
}

inline DistanceField distance_field(const EnvironmentView& view, Vertex source) {
  SearchWorkspace ws;
  return distance_field(view, source, ws);
}

// dist(a, b) with an early stop at b.
inline Dist point_distance(const EnvironmentView& view, Vertex a, Vertex b, SearchWorkspace& ws) {
  const Vertex src[1] = {a};
  return dial_search(view.lattice(), ws, src, view.max_finite_weight(), search_weight(view), everywhere,
                     kUnreachable - 1, b);
}

enum class AllMethod { deletion, counting, interval };

struct GeodesicSummary {
  Vertex a = kNoVertex, b = kNoVertex;
  WeightMode mode = WeightMode::chemical;
  double t = 0.0;
  std::uint64_t generation = 0;
  Dist distance = kUnreachable;
  std::vector<EdgeId> some;  // sorted
  std::vector<EdgeId> all;   // sorted; π̃
  int min_hops = 0, max_hops = 0;  // fewest and most edges over all geodesics
  std::int64_t counting_rechecks = 0;
  DistanceField from_a, from_b;

  bool in_some(EdgeId e) const { return std::binary_search(some.begin(), some.end(), e); }
  bool in_all(EdgeId e) const { return std::binary_search(all.begin(), all.end(), e); }
};

namespace detail {

inline constexpr std::uint64_t kPrime1 = 2305843009213693951ULL;  // 2^61 - 1
inline constexpr std::uint64_t kPrime2 = 2305843009213693921ULL;

inline std::uint64_t addmod(std::uint64_t x, std::uint64_t y, std::uint64_t p) {
  const std::uint64_t s = x + y;
  return s >= p ? s - p : s;
}
inline std::uint64_t mulmod(std::uint64_t x, std::uint64_t y, std::uint64_t p) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * y % p);
}

// Oriented tight edge: tail u at forward distance fa[u], head v.
struct TightEdge {
  EdgeId e;
  Vertex tail, head;
  Dist start;
  int w;
};

inline std::vector<TightEdge> tight_edges(const EnvironmentView& view, const DistanceField& fa,
                                          const DistanceField& fb, Dist D) {
  const BoxLattice& lat = view.lattice();
  std::vector<TightEdge> out;
  auto w_of = search_weight(view);
  auto on_geo = [&](Vertex x) {
    return fa.reachable(x) && fb.reachable(x) &&
           static_cast<std::int64_t>(fa[x]) + fb[x] == D;
  };
  for (EdgeId e = 0; e < lat.num_edges(); ++e) {
    const int w = w_of(e);
    if (w < 0) continue;
    const auto [x, y] = lat.endpoints(e);
    if (!on_geo(x) || !on_geo(y)) continue;
    if (static_cast<std::int64_t>(fa[x]) + w + fb[y] == D) out.push_back({e, x, y, fa[x], w});
    else if (static_cast<std::int64_t>(fa[y]) + w + fb[x] == D) out.push_back({e, y, x, fa[y], w});
  }
  return out;
}

}  // namespace detail

// Every geodesic crosses each "time" s in (0, D) through exactly one edge, the
// one whose interval (fa[tail], fa[tail] + w) contains s. An edge is therefore
// on all geodesics iff no other tight edge's interval overlaps its own.
inline std::vector<EdgeId> all_by_interval(std::vector<detail::TightEdge> tight) {
  std::sort(tight.begin(), tight.end(), [](const auto& x, const auto& y) {
    return x.start != y.start ? x.start < y.start : x.start + x.w < y.start + y.w;
  });
  std::vector<EdgeId> all;
  std::int64_t reach = -1;  // max right end among earlier intervals
  for (std::size_t i = 0; i < tight.size(); ++i) {
    const std::int64_t l = tight[i].start, r = l + tight[i].w;
    const bool left_free = reach <= l;
    const bool right_free = i + 1 == tight.size() || tight[i + 1].start >= r;
    if (left_free && right_free) all.push_back(tight[i].e);
    reach = std::max(reach, r);
  }
  std::sort(all.begin(), all.end());
  return all;
}

inline Dist distance_without(const EnvironmentView& view, Vertex a, Vertex b, EdgeId e, SearchWorkspace& ws) {
  auto base = search_weight(view);
  const Vertex src[1] = {a};
  return dial_search(view.lattice(), ws, src, view.max_finite_weight(),
                     [&](EdgeId f) { return f == e ? -1 : base(f); }, everywhere, kUnreachable - 1, b);
}

inline std::vector<EdgeId> all_by_deletion(const EnvironmentView& view, const GeodesicSummary& s,
                                           SearchWorkspace& ws) {
  std::vector<EdgeId> all;
  for (EdgeId e : s.some)
    if (distance_without(view, s.a, s.b, e, ws) > s.distance) all.push_back(e);
  return all;
}

// Geodesic counts along the tight DAG modulo two primes. An edge is on every
// geodesic iff N_a(tail) N_b(head) = N_a(b); disagreements between the moduli
// or vanishing residues fall back to deletion.
inline std::vector<EdgeId> all_by_counting(const EnvironmentView& view, const std::vector<detail::TightEdge>& tight,
                                           GeodesicSummary& s, SearchWorkspace& ws) {
  using detail::kPrime1;
  using detail::kPrime2;
  std::vector<Vertex> verts;
  verts.reserve(tight.size() * 2);
  for (const auto& te : tight) {
    verts.push_back(te.tail);
    verts.push_back(te.head);
  }
  verts.push_back(s.a);
  verts.push_back(s.b);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  auto idx = [&](Vertex v) {
    return static_cast<std::size_t>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
  };
  const std::size_t m = verts.size();
  std::vector<std::uint64_t> fa1(m, 0), fa2(m, 0), fb1(m, 0), fb2(m, 0);
  std::vector<std::size_t> order(tight.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return tight[x].start < tight[y].start; });
  fa1[idx(s.a)] = fa2[idx(s.a)] = 1;
  for (std::size_t k : order) {
    const auto& te = tight[k];
    const std::size_t i = idx(te.tail), j = idx(te.head);
    fa1[j] = detail::addmod(fa1[j], fa1[i], kPrime1);
    fa2[j] = detail::addmod(fa2[j], fa2[i], kPrime2);
  }
  fb1[idx(s.b)] = fb2[idx(s.b)] = 1;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& te = tight[*it];
    const std::size_t i = idx(te.tail), j = idx(te.head);
    fb1[i] = detail::addmod(fb1[i], fb1[j], kPrime1);
    fb2[i] = detail::addmod(fb2[i], fb2[j], kPrime2);
  }
  const std::uint64_t tot1 = fa1[idx(s.b)], tot2 = fa2[idx(s.b)];
  std::vector<EdgeId> all;
  for (const auto& te : tight) {
    const std::size_t i = idx(te.tail), j = idx(te.head);
    const bool eq1 = detail::mulmod(fa1[i], fb1[j], kPrime1) == tot1;
    const bool eq2 = detail::mulmod(fa2[i], fb2[j], kPrime2) == tot2;
    const bool degenerate = tot1 == 0 || tot2 == 0;
    if (eq1 != eq2 || degenerate) {
      ++s.counting_rechecks;
      if (distance_without(view, s.a, s.b, te.e, ws) > s.distance) all.push_back(te.e);
    } else if (eq1) {
      all.push_back(te.e);
    }
  }
  std::sort(all.begin(), all.end());
  return all;
}

inline void hop_range(const std::vector<detail::TightEdge>& tight, GeodesicSummary& s) {
  if (s.a == s.b) {
    s.min_hops = s.max_hops = 0;
    return;
  }
  std::vector<detail::TightEdge> sorted = tight;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.start < y.start; });
  std::vector<Vertex> keys;
  keys.reserve(sorted.size() * 2 + 1);
  for (const auto& te : sorted) {
    keys.push_back(te.tail);
    keys.push_back(te.head);
  }
  keys.push_back(s.a);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<int> lo(keys.size(), 1 << 30), hi(keys.size(), -1);
  auto id = [&](Vertex v) { return std::lower_bound(keys.begin(), keys.end(), v) - keys.begin(); };
  lo[id(s.a)] = hi[id(s.a)] = 0;
  for (const auto& te : sorted) {
    const auto i = id(te.tail), j = id(te.head);
    if (hi[i] < 0) continue;
    lo[j] = std::min(lo[j], lo[i] + 1);
    hi[j] = std::max(hi[j], hi[i] + 1);
  }
  s.min_hops = lo[id(s.b)];
  s.max_hops = hi[id(s.b)];
}

inline GeodesicSummary geodesic_summary(const EnvironmentView& view, Vertex a, Vertex b, SearchWorkspace& ws,
                                        AllMethod method = AllMethod::interval) {
  GeodesicSummary s;
  s.a = a;
  s.b = b;
  s.mode = view.mode();
  s.t = view.t();
  s.generation = view.generation();
  s.from_a = distance_field(view, a, ws);
  if (!s.from_a.reachable(b)) throw Unreachable();
  s.from_b = distance_field(view, b, ws);
  s.distance = s.from_a[b];
  const auto tight = detail::tight_edges(view, s.from_a, s.from_b, s.distance);
  s.some.reserve(tight.size());
  for (const auto& te : tight) s.some.push_back(te.e);
  std::sort(s.some.begin(), s.some.end());
  hop_range(tight, s);
  switch (method) {
    case AllMethod::deletion: s.all = all_by_deletion(view, s, ws); break;
    case AllMethod::counting: s.all = all_by_counting(view, tight, s, ws); break;
    case AllMethod::interval: s.all = all_by_interval(tight); break;
  }
  return s;
}

inline GeodesicSummary geodesic_summary(const EnvironmentView& view, Vertex a, Vertex b,
                                        AllMethod method = AllMethod::interval) {
  SearchWorkspace ws;
  return geodesic_summary(view, a, b, ws, method);
}

inline std::int64_t overlap(const GeodesicSummary& s, const GeodesicSummary& t) {
  if (s.generation != t.generation) throw GenerationMismatch();
  std::int64_t k = 0;
  auto i = s.all.begin();
  auto j = t.all.begin();
  while (i != s.all.end() && j != t.all.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else {
      ++k;
      ++i;
      ++j;
    }
  }
  return k;
}

// One specific geodesic: walk back from b through the smallest-index tight
// predecessor. Returns the edges in order from a to b.
inline std::vector<EdgeId> canonical_geodesic(const EnvironmentView& view, const DistanceField& fa, Vertex b) {
  const BoxLattice& lat = view.lattice();
  if (!fa.reachable(b)) throw Unreachable();
  auto w_of = search_weight(view);
  std::vector<EdgeId> path;
  Vertex v = b;
  while (fa[v] != 0) {
    Vertex best = kNoVertex;
    EdgeId best_e = kNoEdge;
    lat.for_each_neighbor(v, [&](Vertex u, EdgeId e) {
      const int w = w_of(e);
      if (w < 0 || !fa.reachable(u)) return;
      if (static_cast<std::int64_t>(fa[u]) + w == fa[v] && (best == kNoVertex || u < best)) {
        best = u;
        best_e = e;
      }
    });
    path.push_back(best_e);
    v = best;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

struct EndpointPair {
  RegularizedPoint a, b;
};

inline EndpointPair regularized_endpoints(const BoxLattice& lat, const ClusterLabeling& lab, Vertex z0, Vertex z1) {
  return {regularize(lat, lab, z0), regularize(lat, lab, z1)};
}

struct GeodesicComparison {
  bool coincide = false;
  bool same_distance = false, same_some = false, same_all = false;
  Dist chemical = kUnreachable, truncated = kUnreachable;
};

// D̃^t against T̃^t_M on the same regularized endpoints.
inline GeodesicComparison compare_geodesic_sets(const CoupledEnvironment& env, double t, int M, Vertex z0,
                                                Vertex z1, SearchWorkspace& ws) {
  const EnvironmentView chem = view_at(env, t, WeightMode::chemical, M);
  const ClusterLabeling lab = label_clusters(chem);
  if (!lab.has_giant()) throw NoGiantCluster();
  const auto ends = regularized_endpoints(env.lattice(), lab, z0, z1);
  const EnvironmentView trunc = view_at(env, t, WeightMode::truncated, M);
  const auto sc = geodesic_summary(chem, ends.a.target, ends.b.target, ws);
  const auto st = geodesic_summary(trunc, ends.a.target, ends.b.target, ws);
  GeodesicComparison c;
  c.chemical = sc.distance;
  c.truncated = st.distance;
  c.same_distance = sc.distance == st.distance;
  c.same_some = sc.some == st.some;
  c.same_all = sc.all == st.all;
  c.coincide = c.same_distance && c.same_some && c.same_all;
  return c;
}

}  // namespace dynperc

#endif  // DYNPERC_GEODESICS_HPP
