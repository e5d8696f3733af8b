#ifndef DYNPERC_UNION_FIND_HPP
#define DYNPERC_UNION_FIND_HPP

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace dynperc {

// Union by size with path halving.
template <class Index = std::int64_t>
class DisjointSets {
public:
  explicit DisjointSets(Index n = 0) { reset(n); }

  void reset(Index n) {
    parent_.resize(static_cast<std::size_t>(n));
    std::iota(parent_.begin(), parent_.end(), Index{0});
    size_.assign(static_cast<std::size_t>(n), 1);
  }

  Index find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  Index size_of(Index x) { return size_[find(x)]; }
  Index count() const { return static_cast<Index>(parent_.size()); }

private:
  std::vector<Index> parent_;
  std::vector<Index> size_;
};

}  // namespace dynperc

#endif  // DYNPERC_UNION_FIND_HPP
