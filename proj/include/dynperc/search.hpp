#ifndef DYNPERC_SEARCH_HPP
#define DYNPERC_SEARCH_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dynperc/lattice.hpp"

namespace dynperc {

using Dist = std::int32_t;
inline constexpr Dist kUnreachable = std::numeric_limits<Dist>::max();

// Distance labels with O(1) reset: an entry is valid only when its stamp
// matches the current epoch. One workspace per task.
class SearchWorkspace {
public:
  void prepare(Vertex num_vertices, int max_weight) {
    if (static_cast<Vertex>(dist_.size()) != num_vertices) {
      dist_.assign(static_cast<std::size_t>(num_vertices), kUnreachable);
      stamp_.assign(static_cast<std::size_t>(num_vertices), 0);
      epoch_ = 0;
    }
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    // any ring longer than the largest weight works
    const auto nb = static_cast<std::size_t>(max_weight) + 1;
    if (buckets_.size() < nb) buckets_.resize(nb);
    for (auto& b : buckets_) b.clear();
    settled_.clear();
  }
  Dist get(Vertex v) const { return stamp_[v] == epoch_ ? dist_[v] : kUnreachable; }
  void set(Vertex v, Dist d) {
    stamp_[v] = epoch_;
    dist_[v] = d;
  }
  // Vertices in the order they were settled by the last search.
  const std::vector<Vertex>& settled() const { return settled_; }

  std::vector<std::vector<Vertex>>& buckets() { return buckets_; }
  std::vector<Vertex>& settled_mut() { return settled_; }

private:
  std::vector<Dist> dist_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<std::vector<Vertex>> buckets_;
  std::vector<Vertex> settled_;
};

// Multi-source shortest paths with integer edge weights in [0, max_weight]
// using a circular bucket queue. weight(e) < 0 forbids e; inside(v) restricts
// the searched region. Vertices farther than `cutoff` are left unlabelled.
// The search halts right after settling a vertex for which stop(v) is true
// and returns that vertex's distance; otherwise returns kUnreachable.
template <class WeightFn, class InsideFn, class StopFn>
Dist dial_search_until(const BoxLattice& lat, SearchWorkspace& ws, std::span<const Vertex> sources, int max_weight,
                       WeightFn&& weight, InsideFn&& inside, Dist cutoff, StopFn&& stop) {
  ws.prepare(lat.num_vertices(), max_weight);
  auto& buckets = ws.buckets();
  auto& settled = ws.settled_mut();
  const auto B = static_cast<Dist>(buckets.size());
  std::int64_t pending = 0;
  for (Vertex s : sources) {
    if (!inside(s) || ws.get(s) == 0) continue;
    ws.set(s, 0);
    buckets[0].push_back(s);
    ++pending;
  }
  const int d = lat.dim();
  for (Dist cur = 0; pending > 0 && cur <= cutoff; ++cur) {
    auto& bucket = buckets[cur % B];
    // weight-0 relaxations append to the bucket being scanned
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      const Vertex v = bucket[i];
      --pending;
      if (ws.get(v) != cur) continue;
      settled.push_back(v);
      if (stop(v)) {
        bucket.clear();
        return cur;
      }
      for (int a = 0; a < d; ++a) {
        for (int dir = 0; dir < 2; ++dir) {
          const EdgeId e = dir == 0 ? lat.edge_up(v, a) : lat.edge_down(v, a);
          if (e == kNoEdge) continue;
          const int w = weight(e);
          if (w < 0) continue;
          const Vertex u = dir == 0 ? v + lat.stride(a) : v - lat.stride(a);
          const Dist nd = cur + w;
          if (nd > cutoff || nd >= ws.get(u) || !inside(u)) continue;
          ws.set(u, nd);
          buckets[nd % B].push_back(u);
          ++pending;
        }
      }
    }
    bucket.clear();
  }
  return kUnreachable;
}

// As above; if `target` is given the search stops once it is settled and its
// distance is returned.
template <class WeightFn, class InsideFn>
Dist dial_search(const BoxLattice& lat, SearchWorkspace& ws, std::span<const Vertex> sources, int max_weight,
                 WeightFn&& weight, InsideFn&& inside, Dist cutoff = kUnreachable - 1,
                 Vertex target = kNoVertex) {
  return dial_search_until(lat, ws, sources, max_weight, weight, inside, cutoff,
                           [target](Vertex v) { return v == target; });
}

inline constexpr auto everywhere = [](Vertex) { return true; };

}  // namespace dynperc

#endif  // DYNPERC_SEARCH_HPP
