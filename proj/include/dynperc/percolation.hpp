#ifndef DYNPERC_PERCOLATION_HPP
#define DYNPERC_PERCOLATION_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dynperc/environment.hpp"
#include "dynperc/lattice.hpp"
#include "dynperc/union_find.hpp"

namespace dynperc {

class NoGiantCluster : public std::runtime_error {
public:
  NoGiantCluster() : std::runtime_error("no giant cluster in this view") {}
};

// Connected components of the open subgraph. Labels are numbered in increasing
// order of each cluster's minimal vertex, so "smallest label" and "smallest
// lexicographic minimal vertex" coincide.
struct ClusterLabeling {
  std::vector<std::int32_t> label;     // per vertex
  std::vector<std::int64_t> size;      // per label
  std::vector<Vertex> min_vertex;      // per label
  std::vector<int> extent_lo, extent_hi;  // per label and axis, flattened label*d + axis
  std::int32_t giant = -1;
  std::vector<bool> giant_crosses;     // per axis
  int d = 0;
  std::uint64_t generation = 0;
  double t = 0.0;

  bool has_giant() const { return giant >= 0; }
  bool in_giant(Vertex v) const { return giant >= 0 && label[v] == giant; }
  std::int32_t num_clusters() const { return static_cast<std::int32_t>(size.size()); }
  std::int64_t giant_size() const { return giant >= 0 ? size[giant] : 0; }
  bool giant_crosses_all() const {
    return has_giant() && std::all_of(giant_crosses.begin(), giant_crosses.end(), [](bool b) { return b; });
  }
  // ∞-norm diameter of a cluster's bounding box.
  int diameter(std::int32_t c) const {
    int m = 0;
    for (int a = 0; a < d; ++a) m = std::max(m, extent_hi[c * d + a] - extent_lo[c * d + a]);
    return m;
  }
};

inline ClusterLabeling label_clusters(const EnvironmentView& view) {
  const BoxLattice& lat = view.lattice();
  const Vertex V = lat.num_vertices();
  const int d = lat.dim();
  DisjointSets<Vertex> ds(V);
  for (EdgeId e = 0; e < lat.num_edges(); ++e)
    if (view.open(e)) {
      const auto [u, v] = lat.endpoints(e);
      ds.unite(u, v);
    }
  ClusterLabeling lab;
  lab.d = d;
  lab.generation = view.generation();
  lab.t = view.t();
  lab.label.assign(static_cast<std::size_t>(V), -1);
  std::vector<std::int32_t> root_label(static_cast<std::size_t>(V), -1);
  for (Vertex v = 0; v < V; ++v) {
    const Vertex r = ds.find(v);
    if (root_label[r] < 0) {
      root_label[r] = static_cast<std::int32_t>(lab.size.size());
      lab.size.push_back(0);
      lab.min_vertex.push_back(v);
      for (int a = 0; a < d; ++a) {
        lab.extent_lo.push_back(std::numeric_limits<int>::max());
        lab.extent_hi.push_back(std::numeric_limits<int>::min());
      }
    }
    const std::int32_t c = root_label[r];
    lab.label[v] = c;
    ++lab.size[c];
    for (int a = 0; a < d; ++a) {
      const int x = lat.coord(v, a);
      lab.extent_lo[c * d + a] = std::min(lab.extent_lo[c * d + a], x);
      lab.extent_hi[c * d + a] = std::max(lab.extent_hi[c * d + a], x);
    }
  }
  std::int64_t best = 1;
  for (std::int32_t c = 0; c < lab.num_clusters(); ++c)
    if (lab.size[c] > best) {
      best = lab.size[c];
      lab.giant = c;
    }
  lab.giant_crosses.assign(static_cast<std::size_t>(d), false);
  if (lab.giant >= 0)
    for (int a = 0; a < d; ++a)
      lab.giant_crosses[a] = lab.extent_lo[lab.giant * d + a] == -lat.side() &&
                             lab.extent_hi[lab.giant * d + a] == lat.side();
  return lab;
}

struct RegularizedPoint {
  Vertex source = kNoVertex;
  Vertex target = kNoVertex;
  int displacement = 0;
  bool operator==(const RegularizedPoint&) const = default;
};

// Closest vertex to z (∞-norm) satisfying pred, smallest index among ties.
// Searches shells of growing radius; returns kNoVertex past max_radius.
template <class Pred>
Vertex nearest_matching(const BoxLattice& lat, Vertex z, Pred&& pred, int max_radius, int* dist = nullptr) {
  for (int r = 0; r <= max_radius; ++r) {
    const Box b = lat.window(z, r);
    Vertex found = kNoVertex;
    bool any = false;
    lat.for_each_vertex(b, [&](Vertex v) {
      if (found != kNoVertex) return;
      if (lat.dist_inf(v, z) != r) return;
      any = true;
      if (pred(v)) found = v;
    });
    if (found != kNoVertex) {
      if (dist) *dist = r;
      return found;
    }
    if (!any) break;
  }
  return kNoVertex;
}

inline RegularizedPoint regularize(const BoxLattice& lat, const ClusterLabeling& lab, Vertex z) {
  if (!lab.has_giant()) throw NoGiantCluster();
  int r = 0;
  const Vertex w = nearest_matching(lat, z, [&](Vertex v) { return lab.in_giant(v); }, 2 * lat.side(), &r);
  return {z, w, r};
}

inline RegularizedPoint regularize_with_edge_closed(const EnvironmentView& view, EdgeId e, Vertex z) {
  const ClusterLabeling lab = label_clusters(view.with_state(e, false));
  return regularize(view.lattice(), lab, z);
}

// Regularized points of the view with one edge forced open or closed, without
// relabelling the box. Closing a bridge of the giant splits it into the DFS
// subtree below the bridge and the rest; opening an edge merges two clusters.
// Both cases are settled from per-vertex DFS data built once.
class EdgeFlipRegularizer {
public:
  EdgeFlipRegularizer(const EnvironmentView& view, const ClusterLabeling& lab)
      : view_(view), lat_(view.lattice()), lab_(lab) {
    if (!lab.has_giant()) return;
    for (std::int32_t c = 0; c < lab.num_clusters(); ++c)
      if (c != lab.giant && (second_ < 0 || lab.size[c] > lab.size[second_])) second_ = c;
    build_tree();
  }

  const ClusterLabeling& labeling() const { return lab_; }

  RegularizedPoint base(Vertex z) const {
    for (const auto& [k, rp] : cache_)
      if (k == z) return rp;
    RegularizedPoint rp = dynperc::regularize(lat_, lab_, z);
    cache_.emplace_back(z, rp);
    return rp;
  }

  // [z] with e forced to `open_state`; nullopt when that view has no giant.
  std::optional<RegularizedPoint> regularize(EdgeId e, bool open_state, Vertex z) const {
    if (!lab_.has_giant()) {
      const ClusterLabeling l = label_clusters(view_.with_state(e, open_state));
      if (!l.has_giant()) return std::nullopt;
      return dynperc::regularize(lat_, l, z);
    }
    const auto [u, v] = lat_.endpoints(e);
    const bool is_open = view_.open(e);
    if (is_open == open_state) return base(z);
    const std::int32_t G = lab_.giant;
    if (open_state) {
      const std::int32_t lu = lab_.label[u], lv = lab_.label[v];
      if (lu == lv) return base(z);
      const std::int64_t merged = lab_.size[lu] + lab_.size[lv];
      const Vertex merged_min = std::min(lab_.min_vertex[lu], lab_.min_vertex[lv]);
      const bool touches_giant = lu == G || lv == G;
      if (!touches_giant && !beats(merged, merged_min, lab_.size[G], lab_.min_vertex[G])) return base(z);
      return nearest([&](Vertex w) { return lab_.label[w] == lu || lab_.label[w] == lv; }, z);
    }
    // closing an open edge
    if (lab_.label[u] != G) return base(z);
    Vertex child = kNoVertex;
    if (parent_edge_[u] == e) child = u;
    else if (parent_edge_[v] == e) child = v;
    // non-tree edges and tree edges on a cycle leave the giant unchanged
    if (child == kNoVertex || !is_bridge(child)) return base(z);
    const std::int64_t sub = sub_size_[child];
    const std::int64_t rest = lab_.size[G] - sub;
    const Vertex sub_min = sub_min_[child];
    const Vertex rest_min = rest_min_of(child);
    int which = sub > rest || (sub == rest && sub_min < rest_min) ? 0 : 1;
    std::int64_t best_size = which == 0 ? sub : rest;
    Vertex best_min = which == 0 ? sub_min : rest_min;
    if (second_ >= 0 && beats(lab_.size[second_], lab_.min_vertex[second_], best_size, best_min)) {
      which = 2;
      best_size = lab_.size[second_];
    }
    if (best_size <= 1) return std::nullopt;
    if (which == 2) {
      const std::int32_t S = second_;
      return nearest([&](Vertex w) { return lab_.label[w] == S; }, z);
    }
    const std::int64_t lo = tin_[child], hi = tout_[child];
    const bool want_sub = which == 0;
    auto in_piece = [&](Vertex w) {
      if (lab_.label[w] != G) return false;
      const bool inside = tin_[w] >= lo && tin_[w] <= hi;
      return inside == want_sub;
    };
    const RegularizedPoint b = base(z);
    if (in_piece(b.target)) return b;  // the new giant is a subset of the old one
    return nearest(in_piece, z);
  }

  bool is_bridge(Vertex child) const {
    const Vertex p = parent_[child];
    return p != kNoVertex && low_[child] > tin_[p];
  }

private:
  static bool beats(std::int64_t s1, Vertex m1, std::int64_t s2, Vertex m2) {
    return s1 > s2 || (s1 == s2 && m1 < m2);
  }

  template <class Pred>
  RegularizedPoint nearest(Pred&& pred, Vertex z) const {
    int r = 0;
    const Vertex w = nearest_matching(lat_, z, pred, 2 * lat_.side(), &r);
    return {z, w, r};
  }

  Vertex rest_min_of(Vertex child) const {
    const std::int64_t lo = tin_[child], hi = tout_[child];
    Vertex m = std::numeric_limits<Vertex>::max();
    if (lo > 0) m = std::min(m, prefix_min_[lo - 1]);
    if (hi + 1 < static_cast<std::int64_t>(order_.size())) m = std::min(m, suffix_min_[hi + 1]);
    return m;
  }

  // Iterative DFS over the giant's open subgraph: entry times, low links,
  // subtree sizes and subtree minima.
  void build_tree() {
    const Vertex V = lat_.num_vertices();
    const int d = lat_.dim();
    tin_.assign(static_cast<std::size_t>(V), -1);
    tout_.assign(static_cast<std::size_t>(V), -1);
    low_.assign(static_cast<std::size_t>(V), 0);
    parent_.assign(static_cast<std::size_t>(V), kNoVertex);
    parent_edge_.assign(static_cast<std::size_t>(V), kNoEdge);
    sub_size_.assign(static_cast<std::size_t>(V), 0);
    sub_min_.assign(static_cast<std::size_t>(V), 0);
    order_.clear();
    order_.reserve(static_cast<std::size_t>(lab_.giant_size()));
    const Vertex root = lab_.min_vertex[lab_.giant];
    struct Frame {
      Vertex v;
      int k;
    };
    std::vector<Frame> stack;
    std::int64_t timer = 0;
    auto enter = [&](Vertex v) {
      tin_[v] = low_[v] = timer++;
      order_.push_back(v);
      sub_size_[v] = 1;
      sub_min_[v] = v;
      stack.push_back({v, 0});
    };
    enter(root);
    while (!stack.empty()) {
      Frame& f = stack.back();
      const Vertex v = f.v;
      if (f.k < 2 * d) {
        const int k = f.k++;
        const int a = k / 2;
        const EdgeId e = (k % 2 == 0) ? lat_.edge_up(v, a) : lat_.edge_down(v, a);
        if (e == kNoEdge || e == parent_edge_[v] || !view_.open(e)) continue;
        const Vertex w = (k % 2 == 0) ? v + lat_.stride(a) : v - lat_.stride(a);
        if (tin_[w] < 0) {
          parent_[w] = v;
          parent_edge_[w] = e;
          enter(w);
        } else {
          low_[v] = std::min(low_[v], tin_[w]);
        }
        continue;
      }
      tout_[v] = timer - 1;
      stack.pop_back();
      const Vertex p = parent_[v];
      if (p != kNoVertex) {
        low_[p] = std::min(low_[p], low_[v]);
        sub_size_[p] += sub_size_[v];
        sub_min_[p] = std::min(sub_min_[p], sub_min_[v]);
      }
    }
    const std::size_t m = order_.size();
    prefix_min_.resize(m);
    suffix_min_.resize(m);
    for (std::size_t i = 0; i < m; ++i) prefix_min_[i] = i ? std::min(prefix_min_[i - 1], order_[i]) : order_[i];
    for (std::size_t i = m; i-- > 0;)
      suffix_min_[i] = i + 1 < m ? std::min(suffix_min_[i + 1], order_[i]) : order_[i];
  }

  EnvironmentView view_;
  const BoxLattice& lat_;
  const ClusterLabeling& lab_;
  std::int32_t second_ = -1;
  std::vector<std::int64_t> tin_, tout_, low_;
  std::vector<Vertex> parent_;
  std::vector<EdgeId> parent_edge_;
  std::vector<std::int64_t> sub_size_;
  std::vector<Vertex> sub_min_;
  std::vector<Vertex> order_, prefix_min_, suffix_min_;
  mutable std::vector<std::pair<Vertex, RegularizedPoint>> cache_;
};

// Number of clusters whose bounding-box ∞-diameter is at least `min_diameter`.
inline int count_clusters_with_diameter(const ClusterLabeling& lab, int min_diameter) {
  int k = 0;
  for (std::int32_t c = 0; c < lab.num_clusters(); ++c)
    if (lab.size[c] > 1 && lab.diameter(c) >= min_diameter) ++k;
  return k;
}

}  // namespace dynperc

#endif  // DYNPERC_PERCOLATION_HPP
