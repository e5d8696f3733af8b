#ifndef DYNPERC_LATTICE_ANIMAL_HPP
#define DYNPERC_LATTICE_ANIMAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "dynperc/effective_radius.hpp"
#include "dynperc/environment.hpp"
#include "dynperc/rng.hpp"

namespace dynperc {

// Edge indicators I_{e,N} around the origin of a box lattice.
struct AnimalField {
  std::shared_ptr<const BoxLattice> lat;
  int N = 1;
  BitVector ind;
  double q = 0.0;  // mean indicator: exact for synthetic fields, empirical otherwise
  bool synthetic = true;

  bool operator()(EdgeId e) const { return ind.test(static_cast<std::size_t>(e)); }
};

namespace detail {

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

inline std::uint64_t block_key(const BoxLattice& lat, Vertex v, int N) {
  std::uint64_t k = 0;
  for (int a = 0; a < lat.dim(); ++a)
    k = k * 0x100000001b3ULL + static_cast<std::uint64_t>(static_cast<std::int64_t>(floor_div(lat.coord(v, a), N)) + (1LL << 31));
  return k;
}

}  // namespace detail

// I_e = 1{U_B < q_block} 1{u_e < q_edge}, where B is the side-N block holding
// the lower endpoint of e. Indicators in different blocks are independent, so
// the field is finitely dependent at range N; each has mean q_block * q_edge.
inline AnimalField synthetic_field(std::shared_ptr<const BoxLattice> lat, int N, double q_block, double q_edge,
                                   std::uint64_t seed, std::uint64_t sample) {
  if (N < 1) throw std::invalid_argument("synthetic_field: N must be >= 1");
  AnimalField f;
  f.N = N;
  f.q = q_block * q_edge;
  f.synthetic = true;
  f.ind = BitVector(static_cast<std::size_t>(lat->num_edges()));
  const Threshold hb = threshold_for(q_block), he = threshold_for(q_edge);
  for (EdgeId e = 0; e < lat->num_edges(); ++e) {
    const Vertex x = lat->edge_base(e);
    const bool on = hb.passes(keyed_u64(seed, StreamTag::animal_block, sample, detail::block_key(*lat, x, N))) &&
                    he.passes(keyed_u64(seed, StreamTag::animal_edge, sample, static_cast<std::uint64_t>(e)));
    if (on) f.ind.set(static_cast<std::size_t>(e), true);
  }
  f.lat = std::move(lat);
  return f;
}

// I_{e,N} = 1{N-1 ≤ ĥr_e < N} on edges of Λ_reach(0); other edges are 0.
// `q` is left at the fraction of set indicators in that window.
inline AnimalField derived_field(const CoupledEnvironment& env, double t, const RadiusParams& prm, int N, int reach,
                                 RadiusWorkspace& ws) {
  const BoxLattice& lat = env.lattice();
  AnimalField f;
  f.lat = env.lattice_ptr();
  f.N = N;
  f.synthetic = false;
  f.ind = BitVector(static_cast<std::size_t>(lat.num_edges()));
  const Box b = lat.window(lat.vertex(Coord(static_cast<std::size_t>(lat.dim()), 0)), reach);
  std::int64_t on = 0, total = 0;
  lat.for_each_vertex(b, [&](Vertex x) {
    for (int a = 0; a < lat.dim(); ++a) {
      if (lat.coord(x, a) + 1 > b.hi[a]) continue;
      const EdgeId e = lat.edge_up(x, a);
      const RadiusRecord r = radius(env, e, t, prm, ws);
      ++total;
      if (r.hat_r >= N - 1 && r.hat_r < N) {
        f.ind.set(static_cast<std::size_t>(e), true);
        ++on;
      }
    }
  });
  f.q = total ? static_cast<double>(on) / static_cast<double>(total) : 0.0;
  return f;
}

struct AnimalResult {
  int L = 0;
  int N = 0;
  int value = 0;                // Γ_{L,N}
  std::vector<EdgeId> witness;  // self-avoiding, from the origin
  bool exact = true;
};

inline constexpr int kExactAnimalLimit = 14;

namespace detail {

struct AnimalSearch {
  const AnimalField& f;
  const BoxLattice& lat;
  int L;
  std::vector<char> used;
  std::vector<EdgeId> path, best_path;
  int best = -1;

  void go(Vertex v, int score) {
    if (score > best) {
      best = score;
      best_path = path;
    }
    const int rem = L - static_cast<int>(path.size());
    if (rem == 0 || score + rem <= best) return;
    lat.for_each_neighbor(v, [&](Vertex y, EdgeId e) {
      if (used[y]) return;
      used[y] = 1;
      path.push_back(e);
      go(y, score + (f(e) ? 1 : 0));
      path.pop_back();
      used[y] = 0;
    });
  }
};

}  // namespace detail

// Γ_{L,N}: the largest indicator sum over self-avoiding paths from the origin
// with at most L edges. Exact branch and bound up to `exact_limit`; beyond it a
// beam search gives a lower bound and the result is flagged inexact.
inline AnimalResult greedy_animal(const AnimalField& f, int L, int exact_limit = kExactAnimalLimit,
                                  std::size_t beam = 4096) {
  const BoxLattice& lat = *f.lat;
  if (L < 0) throw std::invalid_argument("greedy_animal: L must be >= 0");
  if (L > lat.side()) throw std::invalid_argument("greedy_animal: box too small for L");
  const Vertex origin = lat.vertex(Coord(static_cast<std::size_t>(lat.dim()), 0));
  AnimalResult res;
  res.L = L;
  res.N = f.N;
  if (L <= exact_limit) {
    detail::AnimalSearch s{f, lat, L, std::vector<char>(static_cast<std::size_t>(lat.num_vertices()), 0), {}, {}, -1};
    s.used[origin] = 1;
    s.go(origin, 0);
    res.value = s.best;
    res.witness = std::move(s.best_path);
    return res;
  }
  res.exact = false;
  struct State {
    std::vector<Vertex> verts;
    std::vector<EdgeId> edges;
    int score = 0;
  };
  std::vector<State> layer{State{{origin}, {}, 0}};
  for (int step = 0; step < L && !layer.empty(); ++step) {
    std::vector<State> next;
    for (const State& st : layer) {
      lat.for_each_neighbor(st.verts.back(), [&](Vertex y, EdgeId e) {
        if (std::find(st.verts.begin(), st.verts.end(), y) != st.verts.end()) return;
        State ns = st;
        ns.verts.push_back(y);
        ns.edges.push_back(e);
        ns.score += f(e) ? 1 : 0;
        next.push_back(std::move(ns));
      });
    }
    std::stable_sort(next.begin(), next.end(), [](const State& a, const State& b) { return a.score > b.score; });
    if (next.size() > beam) next.resize(beam);
    for (const State& st : next)
      if (st.score > res.value) {
        res.value = st.score;
        res.witness = st.edges;
      }
    layer = std::move(next);
  }
  return res;
}

inline int indicator_sum(const AnimalField& f, const std::vector<EdgeId>& path) {
  int s = 0;
  for (EdgeId e : path) s += f(e) ? 1 : 0;
  return s;
}

// (Σ_{e∈γ} ĥr_e²)² for one path, with f(x) = x².
inline double radius_square_moment(const CoupledEnvironment& env, double t, const RadiusParams& prm,
                                   const std::vector<EdgeId>& path, RadiusWorkspace& ws) {
  double s = 0.0;
  for (EdgeId e : path) {
    const double h = radius(env, e, t, prm, ws).hat_r;
    s += h * h;
  }
  return s * s;
}

}  // namespace dynperc

#endif  // DYNPERC_LATTICE_ANIMAL_HPP
