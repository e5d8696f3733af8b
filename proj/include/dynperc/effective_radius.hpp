#ifndef DYNPERC_EFFECTIVE_RADIUS_HPP
#define DYNPERC_EFFECTIVE_RADIUS_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dynperc/geodesics.hpp"
#include "dynperc/union_find.hpp"

namespace dynperc {

class ClippedWindow : public std::runtime_error {
public:
  ClippedWindow() : std::runtime_error("window around the edge leaves the box") {}
};

// ∞-distance to a fixed centre, with the centre's coordinates cached.
class Rings {
public:
  Rings(const BoxLattice& lat, Vertex center) : lat_(lat), c_(lat.coords(center)) {}
  int level(Vertex v) const {
    int m = 0;
    for (int a = 0; a < lat_.dim(); ++a) m = std::max(m, std::abs(lat_.coord(v, a) - c_[a]));
    return m;
  }

private:
  const BoxLattice& lat_;
  Coord c_;
};

namespace detail {

inline auto open_weight(const EnvironmentView& view) {
  return [&view](EdgeId e) { return view.open(e) ? 1 : -1; };
}

// Vertices of a box in index order with a dense local numbering.
struct LocalBox {
  std::vector<Vertex> verts;
  std::vector<std::int32_t> local;  // by global vertex; -1 outside
};

inline void fill_local(const BoxLattice& lat, const Box& b, LocalBox& out, std::vector<std::int32_t>& scratch) {
  if (static_cast<Vertex>(scratch.size()) != lat.num_vertices())
    scratch.assign(static_cast<std::size_t>(lat.num_vertices()), -1);
  for (Vertex v : out.verts) scratch[v] = -1;
  out.verts.clear();
  lat.for_each_vertex(b, [&](Vertex v) {
    scratch[v] = static_cast<std::int32_t>(out.verts.size());
    out.verts.push_back(v);
  });
}

}  // namespace detail

namespace detail {

// Λ_R(x) copied into flat arrays: local indices follow the global index
// order, edge weights are read once.
struct WindowGrid {
  int d = 0, R = 0, w = 0;
  std::vector<std::int64_t> stride;
  std::vector<Vertex> glob;
  std::vector<int> level, coord;    // coord by i * d + a, in [0, 2R]
  std::vector<int> up;              // weight of the edge i -> i + e_a; 0 at the face
  std::vector<Dist> dist;
  std::vector<std::int32_t> touched;
  std::vector<std::vector<std::int32_t>> buckets;

  void build(const EnvironmentView& view, Vertex x, int radius) {
    const BoxLattice& lat = view.lattice();
    d = lat.dim();
    R = radius;
    w = 2 * R + 1;
    stride.assign(static_cast<std::size_t>(d), 1);
    for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * w;
    const std::size_t n = static_cast<std::size_t>(stride[0] * w);
    glob.resize(n);
    level.resize(n);
    coord.resize(n * static_cast<std::size_t>(d));
    up.assign(n * static_cast<std::size_t>(d), 0);
    dist.assign(n, kUnreachable);
    touched.clear();
    std::size_t i = 0;
    const int W = view.closed_weight();
    lat.for_each_vertex(lat.window(x, R), [&](Vertex v) {
      glob[i] = v;
      int l = 0;
      for (int a = 0; a < d; ++a) {
        const int c = lat.coord(v, a) - lat.coord(x, a) + R;
        coord[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] = c;
        l = std::max(l, std::abs(c - R));
        if (c < 2 * R) up[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] = view.open(lat.edge_up(v, a)) ? 1 : W;
      }
      level[i] = l;
      ++i;
    });
    buckets.assign(static_cast<std::size_t>(W) + 1, {});
  }

  template <class Fn>
  void for_each_neighbor(std::int32_t i, Fn&& fn) const {
    for (int a = 0; a < d; ++a) {
      const std::size_t k = static_cast<std::size_t>(i) * static_cast<std::size_t>(d) + static_cast<std::size_t>(a);
      const int c = coord[k];
      if (c < 2 * R) fn(static_cast<std::int32_t>(i + stride[a]), up[k]);
      if (c > 0) {
        const auto j = static_cast<std::int32_t>(i - stride[a]);
        fn(j, up[static_cast<std::size_t>(j) * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)]);
      }
    }
  }

  // Dial from `src` until stop(i) holds for a settled vertex.
  template <class Stop>
  void search(std::int32_t src, Stop&& stop) {
    for (auto i : touched) dist[static_cast<std::size_t>(i)] = kUnreachable;
    touched.clear();
    for (auto& b : buckets) b.clear();
    const auto B = static_cast<Dist>(buckets.size());
    dist[static_cast<std::size_t>(src)] = 0;
    touched.push_back(src);
    buckets[0].push_back(src);
    std::int64_t pending = 1;
    for (Dist cur = 0; pending > 0; ++cur) {
      auto& bucket = buckets[static_cast<std::size_t>(cur % B)];
      for (std::size_t k = 0; k < bucket.size(); ++k) {
        const std::int32_t v = bucket[k];
        --pending;
        if (dist[static_cast<std::size_t>(v)] != cur) continue;
        if (stop(v)) return;
        for_each_neighbor(v, [&](std::int32_t u, int wt) {
          const Dist nd = cur + wt;
          Dist& du = dist[static_cast<std::size_t>(u)];
          if (nd >= du) return;
          if (du == kUnreachable) touched.push_back(u);
          du = nd;
          buckets[static_cast<std::size_t>(nd % B)].push_back(u);
          ++pending;
        });
      }
      bucket.clear();
    }
  }
};

}  // namespace detail

// Per-task scratch for the window computations.
struct RadiusWorkspace {
  SearchWorkspace search, aux;
  detail::WindowGrid grid;
  std::vector<std::int32_t> local;
  detail::LocalBox box;
};

// 𝒲_N: every pair of Λ_{3N}-connected vertices is joined inside Λ_{4N} by an
// open path of length ≤ C_* N.
inline bool check_W(const EnvironmentView& view, EdgeId e, int N, int C_star, RadiusWorkspace& ws) {
  const BoxLattice& lat = view.lattice();
  const Vertex x = lat.edge_base(e);
  if (!lat.window_inside(x, 4 * N)) throw ClippedWindow();
  const Box b3 = lat.window(x, 3 * N);
  detail::fill_local(lat, b3, ws.box, ws.local);
  const auto& verts = ws.box.verts;
  DisjointSets<std::int32_t> ds(static_cast<std::int32_t>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (int a = 0; a < lat.dim(); ++a) {
      const EdgeId f = lat.edge_up(verts[i], a);
      if (f == kNoEdge || !view.open(f)) continue;
      const std::int32_t j = ws.local[verts[i] + lat.stride(a)];
      if (j >= 0) ds.unite(static_cast<std::int32_t>(i), j);
    }
  std::vector<std::vector<Vertex>> clusters;
  {
    std::vector<std::int32_t> slot(verts.size(), -1);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (ds.size_of(static_cast<std::int32_t>(i)) < 2) continue;
      const std::int32_t r = ds.find(static_cast<std::int32_t>(i));
      if (slot[r] < 0) {
        slot[r] = static_cast<std::int32_t>(clusters.size());
        clusters.emplace_back();
      }
      clusters[slot[r]].push_back(verts[i]);
    }
  }
  const Rings rings(lat, x);
  auto in4 = [&](Vertex v) { return rings.level(v) <= 4 * N; };
  const Dist cut = C_star * N;
  auto w = detail::open_weight(view);
  // A pair (y, z) is certified once some searched centre c has
  // d(c, y) + d(c, z) ≤ cut; a search from y certifies every pair (y, ·).
  struct Centre {
    std::vector<Dist> d;  // by position in the cluster
    Dist ecc = 0;
  };
  std::vector<Centre> centres;
  auto search_from = [&](const std::vector<Vertex>& cl, Vertex s, Centre& c) {
    const Vertex src[1] = {s};
    dial_search(lat, ws.search, src, 1, w, in4, cut);
    c.d.resize(cl.size());
    c.ecc = 0;
    for (std::size_t i = 0; i < cl.size(); ++i) {
      c.d[i] = ws.search.get(cl[i]);
      if (c.d[i] == kUnreachable) return false;
      c.ecc = std::max(c.ecc, c.d[i]);
    }
    return true;
  };
  for (const auto& cl : clusters) {
    centres.clear();
    // two sweeps, then the vertex most central between the far ends
    Centre c0, c1, c2;
    auto farthest = [](const Centre& c) {
      return static_cast<std::size_t>(std::max_element(c.d.begin(), c.d.end()) - c.d.begin());
    };
    if (!search_from(cl, cl.front(), c0)) return false;
    if (!search_from(cl, cl[farthest(c0)], c1)) return false;
    if (!search_from(cl, cl[farthest(c1)], c2)) return false;
    std::size_t mid = 0;
    for (std::size_t i = 1; i < cl.size(); ++i)
      if (std::max(c1.d[i], c2.d[i]) < std::max(c1.d[mid], c2.d[mid])) mid = i;
    Centre cm;
    if (!search_from(cl, cl[mid], cm)) return false;
    centres.push_back(std::move(cm));
    centres.push_back(std::move(c0));
    centres.push_back(std::move(c1));
    centres.push_back(std::move(c2));
    std::vector<char> done(cl.size(), 0);
    for (std::size_t i = 0; i < cl.size(); ++i) {
      if (done[i]) continue;
      bool all = false;
      for (const auto& c : centres)
        if (c.d[i] + c.ecc <= cut) {
          all = true;
          break;
        }
      if (all) continue;
      bool need = false;
      for (std::size_t j = 0; j < cl.size() && !need; ++j) {
        if (j == i || done[j]) continue;
        bool ok = false;
        for (const auto& c : centres)
          if (c.d[i] + c.d[j] <= cut) {
            ok = true;
            break;
          }
        need = !ok;
      }
      if (!need) continue;
      Centre ci;
      if (!search_from(cl, cl[i], ci)) return false;
      done[i] = 1;
      centres.push_back(std::move(ci));
    }
  }
  return true;
}

struct AnnulusData {
  int N = 0;
  std::vector<Vertex> inner, outer;        // rings at levels N+1 and 3N
  std::vector<std::int32_t> comp;          // open component of A per local vertex
  int crossing_components = 0;
  std::int32_t crossing = -1;              // the unique crossing component, if any
};

namespace detail {

inline AnnulusData annulus(const EnvironmentView& view, Vertex x, int N, RadiusWorkspace& ws) {
  const BoxLattice& lat = view.lattice();
  Rings rings(lat, x);
  detail::fill_local(lat, lat.window(x, 3 * N), ws.box, ws.local);
  const auto& verts = ws.box.verts;
  AnnulusData A;
  A.N = N;
  const auto n = static_cast<std::int32_t>(verts.size());
  DisjointSets<std::int32_t> ds(n);
  std::vector<int> lvl(verts.size());
  for (std::int32_t i = 0; i < n; ++i) lvl[i] = rings.level(verts[i]);
  for (std::int32_t i = 0; i < n; ++i) {
    if (lvl[i] <= N) continue;
    if (lvl[i] == N + 1) A.inner.push_back(verts[i]);
    if (lvl[i] == 3 * N) A.outer.push_back(verts[i]);
    for (int a = 0; a < lat.dim(); ++a) {
      const EdgeId f = lat.edge_up(verts[i], a);
      if (f == kNoEdge || !view.open(f)) continue;
      const std::int32_t j = ws.local[verts[i] + lat.stride(a)];
      if (j >= 0 && lvl[j] > N) ds.unite(i, j);
    }
  }
  A.comp.assign(verts.size(), -1);
  std::vector<char> touches_in(verts.size(), 0), touches_out(verts.size(), 0);
  for (std::int32_t i = 0; i < n; ++i) {
    if (lvl[i] <= N) continue;
    const std::int32_t r = ds.find(i);
    A.comp[i] = r;
    if (lvl[i] == N + 1) touches_in[r] = 1;
    if (lvl[i] == 3 * N) touches_out[r] = 1;
  }
  for (std::int32_t r = 0; r < n; ++r)
    if (touches_in[r] && touches_out[r] && ds.size_of(r) > 1) {
      ++A.crossing_components;
      A.crossing = r;
    }
  // a single vertex on both rings cannot happen (N+1 < 3N for N ≥ 1)
  return A;
}

}  // namespace detail

struct SegmentSet {
  std::vector<std::vector<Vertex>> segments;  // vertex sets, sorted
};

// Crossing segments of window geodesics of T_M: for every inner-ring source u
// and outer-ring target v, the canonical geodesic from u to v inside
// Λ_{C_* N} (smallest-index tight predecessor), cut into its minimal
// ring-to-ring runs inside A.
inline SegmentSet geodesic_segments(const EnvironmentView& truncated, Vertex x, int N, int C_star,
                                    RadiusWorkspace& ws) {
  auto& g = ws.grid;
  g.build(truncated, x, C_star * N);
  std::vector<std::int32_t> inner, outer;
  for (std::size_t i = 0; i < g.glob.size(); ++i) {
    if (g.level[i] == N + 1) inner.push_back(static_cast<std::int32_t>(i));
    if (g.level[i] == 3 * N) outer.push_back(static_cast<std::int32_t>(i));
  }
  SegmentSet s;
  const std::size_t n = g.glob.size();
  std::vector<std::int32_t> pred(n, -1), from_in(n, -1), from_out(n, -1), nodes;
  std::vector<std::int32_t> mark(n, -1);
  for (std::int32_t u : inner) {
    std::size_t found = 0;
    // every outer-ring vertex settled: later labels cannot matter for the paths
    g.search(u, [&](std::int32_t y) { return g.level[static_cast<std::size_t>(y)] == 3 * N && ++found == outer.size(); });
    // the canonical tree restricted to ancestors of outer-ring vertices
    nodes.clear();
    for (std::int32_t v : outer) {
      std::int32_t cur = v;
      while (mark[static_cast<std::size_t>(cur)] != u) {
        mark[static_cast<std::size_t>(cur)] = u;
        nodes.push_back(cur);
        if (cur == u) break;
        const Dist dc = g.dist[static_cast<std::size_t>(cur)];
        std::int32_t best = -1;
        g.for_each_neighbor(cur, [&](std::int32_t y, int wt) {
          const Dist dy = g.dist[static_cast<std::size_t>(y)];
          if (dy == kUnreachable) return;
          if (static_cast<std::int64_t>(dy) + wt == dc && (best < 0 || y < best)) best = y;
        });
        pred[static_cast<std::size_t>(cur)] = best;
        cur = best;
      }
    }
    // parents first: weights are positive, so a parent is strictly closer
    std::sort(nodes.begin(), nodes.end(), [&](std::int32_t a, std::int32_t b) {
      return g.dist[static_cast<std::size_t>(a)] < g.dist[static_cast<std::size_t>(b)];
    });
    auto emit = [&](std::int32_t first, std::int32_t last) {
      std::vector<Vertex> r;
      for (std::int32_t k = last;; k = pred[static_cast<std::size_t>(k)]) {
        r.push_back(g.glob[static_cast<std::size_t>(k)]);
        if (k == first) break;
      }
      std::sort(r.begin(), r.end());
      s.segments.push_back(std::move(r));
    };
    // pending run starts propagate down the tree
    for (std::int32_t v : nodes) {
      const auto vi = static_cast<std::size_t>(v);
      std::int32_t in = -1, out = -1;
      if (v != u) {
        in = from_in[static_cast<std::size_t>(pred[vi])];
        out = from_out[static_cast<std::size_t>(pred[vi])];
      }
      const int l = g.level[vi];
      if (l <= N) {
        in = out = -1;
      } else if (l == N + 1) {
        if (out >= 0) emit(out, v);
        in = v;
        out = -1;
      } else if (l == 3 * N) {
        if (in >= 0) emit(in, v);
        out = v;
        in = -1;
      }
      from_in[vi] = in;
      from_out[vi] = out;
    }
  }
  std::sort(s.segments.begin(), s.segments.end());
  s.segments.erase(std::unique(s.segments.begin(), s.segments.end()), s.segments.end());
  return s;
}

// Pairwise open distance inside A between vertex sets, all ≤ C_* N. Pairs are
// first certified through single-vertex centres c, using
// D(γ, γ') ≤ min_{v∈γ} d(c, v) + min_{v∈γ'} d(c, v); a set left with an
// uncertified partner gets its own exact search.
inline bool pairwise_within(const EnvironmentView& view, Vertex x, int N, int C_star,
                            const std::vector<std::vector<Vertex>>& sets, RadiusWorkspace& ws,
                            Vertex root = kNoVertex) {
  if (sets.size() < 2) return true;
  const BoxLattice& lat = view.lattice();
  Rings rings(lat, x);
  auto inA = [&](Vertex v) {
    const int l = rings.level(v);
    return l > N && l <= 3 * N;
  };
  auto w = detail::open_weight(view);
  const Dist cut = C_star * N;
  constexpr Dist kFar = kUnreachable / 4;
  struct Centre {
    std::vector<Dist> m;  // by set
    Dist worst = 0;
  };
  std::vector<Centre> centres;
  // returns the set farthest from c, and in `closest` the vertex of it nearest to c
  auto centre_at = [&](Vertex c, Vertex* closest) {
    const Vertex src[1] = {c};
    dial_search(lat, ws.search, src, 1, w, inA);
    Centre ce;
    ce.m.resize(sets.size());
    std::size_t far = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      Dist m = kFar;
      for (Vertex v : sets[i]) m = std::min(m, ws.search.get(v));
      ce.m[i] = m;
      if (m > ce.m[far]) far = i;
    }
    ce.worst = ce.m[far];
    if (closest) {
      *closest = kNoVertex;
      for (Vertex v : sets[far])
        if (ws.search.get(v) == ce.m[far]) {
          *closest = v;
          break;
        }
    }
    centres.push_back(std::move(ce));
    return far;
  };
  if (root == kNoVertex) root = sets.front().front();
  Vertex p = kNoVertex, q = kNoVertex;
  centre_at(root, &p);
  if (p != kNoVertex && centres.back().worst < kFar) {
    centre_at(p, &q);
    if (q != kNoVertex) {
      const Vertex srcp[1] = {p};
      dial_search(lat, ws.aux, srcp, 1, w, inA);
      const Vertex srcq[1] = {q};
      dial_search(lat, ws.search, srcq, 1, w, inA);
      Vertex mid = kNoVertex;
      Dist best = kFar;
      for (Vertex v : ws.search.settled()) {
        const Dist dp = ws.aux.get(v);
        if (dp == kUnreachable) continue;
        const Dist e = std::max(dp, ws.search.get(v));
        if (e < best) {
          best = e;
          mid = v;
        }
      }
      if (mid != kNoVertex) centre_at(mid, nullptr);
    }
  }
  std::vector<char> done(sets.size(), 0);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    bool all = false;
    for (const auto& c : centres)
      if (c.m[i] + c.worst <= cut) {
        all = true;
        break;
      }
    if (all) continue;
    bool need = false;
    for (std::size_t j = 0; j < sets.size() && !need; ++j) {
      if (j == i || done[j]) continue;
      bool ok = false;
      for (const auto& c : centres)
        if (c.m[i] + c.m[j] <= cut) {
          ok = true;
          break;
        }
      need = !ok;
    }
    if (!need) continue;
    dial_search(lat, ws.search, sets[i], 1, w, inA, cut);
    for (std::size_t j = 0; j < sets.size(); ++j) {
      if (j == i || done[j]) continue;
      if (std::none_of(sets[j].begin(), sets[j].end(),
                       [&](Vertex v) { return ws.search.get(v) != kUnreachable; }))
        return false;
    }
    done[i] = 1;
  }
  return true;
}

// Surrogate for 𝒱_N: relevant components are (i) open components of A that
// cross it and (ii) crossing segments of window geodesics. Distinct open
// components are never joined by an open path, so two crossing components
// fail outright; otherwise every segment must meet the crossing component and
// every pair must be joined inside A by an open path of length ≤ C_* N.
// Second stage of the surrogate, given the annulus data of the same view.
inline bool check_V_segments(const EnvironmentView& view, EdgeId e, int N, int C_star, const AnnulusData& A,
                             RadiusWorkspace& ws) {
  const BoxLattice& lat = view.lattice();
  const Vertex x = lat.edge_base(e);
  if (A.crossing_components >= 2) return false;
  const EnvironmentView trunc = view.mode() == WeightMode::truncated ? view : view.with_mode(WeightMode::truncated);
  const SegmentSet segs = geodesic_segments(trunc, x, N, C_star, ws);
  detail::fill_local(lat, lat.window(x, 3 * N), ws.box, ws.local);
  if (A.crossing >= 0) {
    auto in_K = [&](Vertex v) {
      const std::int32_t i = ws.local[v];
      return i >= 0 && A.comp[static_cast<std::size_t>(i)] == A.crossing;
    };
    for (const auto& s : segs.segments)
      if (std::none_of(s.begin(), s.end(), in_K)) return false;
    const auto k0 = std::find(A.comp.begin(), A.comp.end(), A.crossing) - A.comp.begin();
    return pairwise_within(view, x, N, C_star, segs.segments, ws, ws.box.verts[static_cast<std::size_t>(k0)]);
  }
  return pairwise_within(view, x, N, C_star, segs.segments, ws);
}

inline AnnulusData annulus_data(const EnvironmentView& view, EdgeId e, int N, int C_star, RadiusWorkspace& ws) {
  const BoxLattice& lat = view.lattice();
  const Vertex x = lat.edge_base(e);
  if (!lat.window_inside(x, C_star * N)) throw ClippedWindow();
  return detail::annulus(view, x, N, ws);
}

// Surrogate for 𝒱_N: relevant components are (i) open components of A that
// cross it and (ii) crossing segments of window geodesics. Distinct open
// components are never joined by an open path, so two crossing components
// fail outright; otherwise every segment must meet the crossing component and
// every pair must be joined inside A by an open path of length ≤ C_* N.
inline bool check_V_surrogate(const EnvironmentView& view, EdgeId e, int N, int C_star, RadiusWorkspace& ws) {
  const AnnulusData A = annulus_data(view, e, N, C_star, ws);
  return check_V_segments(view, e, N, C_star, A, ws);
}

// Exact 𝒱_1 by enumeration. For N = 1 the minimal crossings of A are single
// radial edges between levels 2 and 3; an open one is always admissible and a
// closed one is admissible iff it is itself a T_M geodesic inside Λ_{C_*}.
inline bool check_V_exact_n1(const EnvironmentView& view, EdgeId e, int C_star, RadiusWorkspace& ws) {
  const BoxLattice& lat = view.lattice();
  const Vertex x = lat.edge_base(e);
  if (!lat.window_inside(x, C_star)) throw ClippedWindow();
  Rings rings(lat, x);
  const EnvironmentView trunc = view.with_mode(WeightMode::truncated);
  auto in_win = [&](Vertex v) { return rings.level(v) <= C_star; };
  std::vector<std::vector<Vertex>> admissible;
  lat.for_each_vertex(lat.window(x, 2), [&](Vertex u) {
    if (rings.level(u) != 2) return;
    lat.for_each_neighbor(u, [&](Vertex v, EdgeId f) {
      if (rings.level(v) != 3) return;
      bool ok = trunc.open(f);
      if (!ok) {
        const Vertex src[1] = {u};
        auto w = search_weight(trunc);
        const Dist d = dial_search(lat, ws.aux, src, trunc.max_finite_weight(),
                                   [&](EdgeId g) { return g == f ? -1 : w(g); }, in_win,
                                   trunc.truncation() - 1, v);
        ok = d == kUnreachable;
      }
      if (ok) admissible.push_back({std::min(u, v), std::max(u, v)});
    });
  });
  return pairwise_within(view, x, 1, C_star, admissible, ws);
}

struct RadiusRecord {
  EdgeId e = kNoEdge;
  double t = 0.0;
  int r = 0;              // 0 together with overflow
  bool overflow = false;
  int hat_r = 0;          // min(C_* r, M)
  bool surrogate = true;
  // per scanned N (index N-1): bits V0, W0, Vt, Wt; `evaluated` marks which
  // sub-events were actually computed
  std::vector<std::uint8_t> holds, evaluated;
  static constexpr std::uint8_t kV0 = 1, kW0 = 2, kVt = 4, kWt = 8;
};

struct RadiusParams {
  int C_star = 16;
  int M = 17;
  int max_N = 1 << 20;  // scanning also stops at the box boundary
};

// Smallest N with 𝒱_N^0 ∩ 𝒲_N^0 ∩ 𝒱_N^t ∩ 𝒲_N^t, scanned upward. The 𝒲
// events are evaluated first and 𝒱 only when both hold.
inline RadiusRecord radius(const CoupledEnvironment& env, EdgeId e, double t, const RadiusParams& prm,
                           RadiusWorkspace& ws) {
  const BoxLattice& lat = env.lattice();
  const EnvironmentView v0 = view_at(env, 0.0, WeightMode::truncated, prm.M);
  const EnvironmentView vt = view_at(env, t, WeightMode::truncated, prm.M);
  RadiusRecord rec;
  rec.e = e;
  rec.t = t;
  const Vertex x = lat.edge_base(e);
  for (int N = 1; N <= prm.max_N; ++N) {
    if (!lat.window_inside(x, prm.C_star * N)) break;
    std::uint8_t holds = 0, eval = 0;
    auto run = [&](std::uint8_t bit, bool value) {
      eval |= bit;
      if (value) holds |= bit;
      return value;
    };
    bool ok = run(RadiusRecord::kW0, check_W(v0, e, N, prm.C_star, ws)) &&
              run(RadiusRecord::kWt, check_W(vt, e, N, prm.C_star, ws));
    if (ok) {
      // both crossing-cluster counts before either segment pass
      const AnnulusData a0 = annulus_data(v0, e, N, prm.C_star, ws);
      const AnnulusData at = annulus_data(vt, e, N, prm.C_star, ws);
      if (a0.crossing_components >= 2) {
        run(RadiusRecord::kV0, false);
        ok = false;
      } else if (at.crossing_components >= 2) {
        run(RadiusRecord::kVt, false);
        ok = false;
      } else {
        ok = run(RadiusRecord::kV0, check_V_segments(v0, e, N, prm.C_star, a0, ws)) &&
             run(RadiusRecord::kVt, check_V_segments(vt, e, N, prm.C_star, at, ws));
      }
    }
    rec.holds.push_back(holds);
    rec.evaluated.push_back(eval);
    if (ok) {
      rec.r = N;
      rec.hat_r = std::min(prm.C_star * N, prm.M);
      return rec;
    }
  }
  rec.overflow = true;
  rec.hat_r = prm.M;
  return rec;
}

struct BypassEdge {
  EdgeId e = kNoEdge;
  int r = 0;
  std::int64_t extra = -1;  // |η \ γ|; -1 when no admissible η exists
  bool violation = false;
};

struct BypassReport {
  std::vector<BypassEdge> edges;
  std::int64_t checked = 0, violations = 0, skipped_near_endpoints = 0, overflow = 0;
};

// For each e in π̃ of the given T̃_M summary with both endpoints outside
// Λ_{3 r_e}(e): the cheapest path η from a to b that avoids Λ_{r_e}(e) and
// uses only s-open edges off the canonical geodesic γ. Its cost counts edges
// not on γ; a violation is cost > bound_constant * r_e.
inline BypassReport verify_bypass(const CoupledEnvironment& env, double t, const GeodesicSummary& summary,
                                  const RadiusParams& prm, int bound_constant, RadiusWorkspace& ws) {
  if (summary.mode != WeightMode::truncated) throw std::invalid_argument("verify_bypass: truncated summary required");
  const BoxLattice& lat = env.lattice();
  const EnvironmentView view = view_at(env, summary.t, WeightMode::truncated, prm.M);
  const auto gamma = canonical_geodesic(view, summary.from_a, summary.b);
  std::vector<EdgeId> on_gamma = gamma;
  std::sort(on_gamma.begin(), on_gamma.end());
  BypassReport rep;
  for (EdgeId e : summary.all) {
    const RadiusRecord rr = radius(env, e, t, prm, ws);
    if (rr.overflow) {
      ++rep.overflow;
      continue;
    }
    const Vertex x = lat.edge_base(e);
    if (lat.dist_inf(x, summary.a) <= 3 * rr.r || lat.dist_inf(x, summary.b) <= 3 * rr.r) {
      ++rep.skipped_near_endpoints;
      continue;
    }
    Rings rings(lat, x);
    auto outside = [&](Vertex v) { return rings.level(v) > rr.r; };
    auto cost = [&](EdgeId f) {
      if (std::binary_search(on_gamma.begin(), on_gamma.end(), f)) return 0;
      return view.open(f) ? 1 : -1;
    };
    const Vertex src[1] = {summary.a};
    const Dist d = dial_search(lat, ws.search, src, 1, cost, outside, kUnreachable - 1, summary.b);
    BypassEdge be;
    be.e = e;
    be.r = rr.r;
    be.extra = d == kUnreachable ? -1 : d;
    be.violation = d == kUnreachable || d > static_cast<Dist>(bound_constant) * rr.r;
    ++rep.checked;
    rep.violations += be.violation;
    rep.edges.push_back(be);
  }
  return rep;
}

// Whether {r_e = ℓ} agrees between two environments.
inline bool locality_check(const CoupledEnvironment& a, const CoupledEnvironment& b, EdgeId e, int ell, double t,
                           const RadiusParams& prm, RadiusWorkspace& ws) {
  RadiusParams capped = prm;
  capped.max_N = ell;
  const RadiusRecord ra = radius(a, e, t, capped, ws);
  const RadiusRecord rb = radius(b, e, t, capped, ws);
  return (ra.r == ell) == (rb.r == ell);
}

// Copy of `env` with every field resampled (from the locality stream) on
// edges not inside Λ_R(x_e).
inline CoupledEnvironment perturb_outside(const CoupledEnvironment& env, EdgeId e, int R, std::uint64_t seed,
                                          std::uint64_t trial) {
  const BoxLattice& lat = env.lattice();
  const Box keep = lat.window(lat.edge_base(e), R);
  BitVector o0 = env.original_bits(), o1 = env.resampled_bits();
  std::vector<std::uint64_t> u = env.clocks();
  RngStream rng(seed, StreamTag::locality, trial, static_cast<std::uint64_t>(e));
  for (EdgeId f = 0; f < lat.num_edges(); ++f) {
    const auto [p, q] = lat.endpoints(f);
    if (keep.contains(lat.coords(p)) && keep.contains(lat.coords(q))) continue;
    o0.set(static_cast<std::size_t>(f), rng() & 1U);
    o1.set(static_cast<std::size_t>(f), rng() & 1U);
    u[static_cast<std::size_t>(f)] = rng();
  }
  return CoupledEnvironment(env.lattice_ptr(), std::move(o0), std::move(o1), std::move(u), env.sample_index(),
                            splitmix64(env.generation() ^ trial));
}

}  // namespace dynperc

#endif  // DYNPERC_EFFECTIVE_RADIUS_HPP
