#ifndef DYNPERC_LATTICE_HPP
#define DYNPERC_LATTICE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dynperc {

using Vertex = std::int64_t;
using EdgeId = std::int64_t;
inline constexpr Vertex kNoVertex = -1;
inline constexpr EdgeId kNoEdge = -1;

using Coord = std::vector<int>;

class ParamError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// M(n) = floor((ln n)^2), never below 2.
inline int default_truncation(int n) {
  if (n < 2) return 2;
  const double l = std::log(static_cast<double>(n));
  return std::max(2, static_cast<int>(std::floor(l * l)));
}

inline int default_margin(int n) {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(n, 1)))));
}

struct SimulationParams {
  int d = 2;
  int side = 0;          // 0: derived from n, x_dir and the default margin
  double p = 0.6;
  int n = 64;
  std::vector<int> x_dir;  // empty: e_1
  int M = 0;             // 0: default_truncation(n)
  int C_star = 0;        // 0: 8 d
  std::uint64_t seed = 1;
  int samples = 100;
  std::vector<double> t_grid{0.0, 0.001, 0.005, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};

  std::vector<int> direction() const {
    if (!x_dir.empty()) return x_dir;
    std::vector<int> e1(static_cast<std::size_t>(d), 0);
    if (d > 0) e1[0] = 1;
    return e1;
  }
  int dir_norm_inf() const {
    int m = 0;
    for (int c : direction()) m = std::max(m, std::abs(c));
    return m;
  }
  int truncation() const { return M > 0 ? M : default_truncation(n); }
  int radius_constant() const { return C_star > 0 ? C_star : 8 * d; }
  int box_side() const { return side > 0 ? side : n * dir_norm_inf() + default_margin(n); }
  Coord origin() const { return Coord(static_cast<std::size_t>(d), 0); }
  Coord target() const {
    Coord c = direction();
    for (auto& x : c) x *= n;
    return c;
  }
};

// Throws ParamError naming the offending field. Returns warnings that do not
// invalidate the parameters.
inline std::vector<std::string> validate(const SimulationParams& prm) {
  std::vector<std::string> warnings;
  if (prm.d < 2) throw ParamError("d: dimension must be >= 2");
  if (!(prm.p >= 0.0 && prm.p <= 1.0)) throw ParamError("p: must lie in [0,1]");
  if (prm.n < 1) throw ParamError("n: endpoint separation must be >= 1");
  if (!prm.x_dir.empty() && static_cast<int>(prm.x_dir.size()) != prm.d)
    throw ParamError("x_dir: length must equal d");
  if (prm.dir_norm_inf() == 0) throw ParamError("x_dir: must be non-zero");
  if (prm.truncation() < 2) throw ParamError("M: truncation level must be >= 2");
  if (prm.radius_constant() < 4) throw ParamError("C_star: must be >= 4");
  if (prm.radius_constant() < 6 * prm.d)
    warnings.push_back("C_star below 6d: the W event is unsatisfiable even when every edge is open");
  if (prm.samples < 1) throw ParamError("samples: must be >= 1");
  if (!std::is_sorted(prm.t_grid.begin(), prm.t_grid.end()))
    throw ParamError("t_grid: must be sorted");
  for (double t : prm.t_grid)
    if (!(t >= 0.0 && t <= 1.0)) throw ParamError("t_grid: values must lie in [0,1]");
  if (prm.side > 0 && prm.side < prm.n * prm.dir_norm_inf() + default_margin(prm.n))
    throw ParamError("side: box too small to contain both endpoints with margin");
  return warnings;
}

// Axis-aligned sub-box [lo, hi] in lattice coordinates.
struct Box {
  Coord lo, hi;
  bool contains(std::span<const int> c) const {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] < lo[i] || c[i] > hi[i]) return false;
    return true;
  }
};

// The box [-side, side]^d with nearest-neighbour edges. Vertices are numbered
// in lexicographic order of their coordinates, so comparing indices compares
// coordinates lexicographically. Edge ids are compact: axis a owns the block
// [a * per_axis, (a+1) * per_axis).
class BoxLattice {
public:
  BoxLattice(int d, int side) : d_(d), side_(side) {
    if (d < 2) throw ParamError("d: dimension must be >= 2");
    if (side < 1) throw ParamError("side: must be >= 1");
    width_ = 2 * side + 1;
    stride_.assign(static_cast<std::size_t>(d), 1);
    for (int a = d - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * width_;
    num_vertices_ = stride_[0] * width_;
    per_axis_ = num_vertices_ / width_ * (width_ - 1);
    num_edges_ = per_axis_ * d;
    slot_to_edge_.assign(static_cast<std::size_t>(num_vertices_ * d), kNoEdge);
    edge_to_slot_.assign(static_cast<std::size_t>(num_edges_), 0);
    std::vector<EdgeId> next(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) next[a] = per_axis_ * a;
    // Iterating vertices in index order fills each axis block in the
    // lexicographic order of the lower endpoints.
    Coord c(static_cast<std::size_t>(d), -side);
    coord_.resize(static_cast<std::size_t>(num_vertices_ * d));
    for (Vertex v = 0; v < num_vertices_; ++v) {
      for (int a = 0; a < d; ++a) {
        coord_[static_cast<std::size_t>(v * d + a)] = c[a];
        if (c[a] < side) {
          const EdgeId id = next[a]++;
          slot_to_edge_[v * d + a] = id;
          edge_to_slot_[id] = v * d + a;
        }
      }
      for (int a = d - 1; a >= 0; --a) {
        if (++c[a] <= side) break;
        c[a] = -side;
      }
    }
  }

  int dim() const { return d_; }
  int side() const { return side_; }
  int width() const { return width_; }
  Vertex num_vertices() const { return num_vertices_; }
  EdgeId num_edges() const { return num_edges_; }
  Vertex stride(int axis) const { return stride_[axis]; }

  bool contains(std::span<const int> c) const {
    if (static_cast<int>(c.size()) != d_) return false;
    for (int x : c)
      if (x < -side_ || x > side_) return false;
    return true;
  }
  Vertex vertex(std::span<const int> c) const {
    if (!contains(c)) throw std::out_of_range("vertex: coordinates outside the box");
    Vertex v = 0;
    for (int a = 0; a < d_; ++a) v += static_cast<Vertex>(c[a] + side_) * stride_[a];
    return v;
  }
  Vertex vertex(std::initializer_list<int> c) const {
    return vertex(std::span<const int>(c.begin(), c.size()));
  }
  int coord(Vertex v, int axis) const { return coord_[static_cast<std::size_t>(v * d_ + axis)]; }
  Coord coords(Vertex v) const {
    Coord c(static_cast<std::size_t>(d_));
    for (int a = 0; a < d_; ++a) c[a] = coord(v, a);
    return c;
  }

  // Edge from v to v + e_axis, or kNoEdge at the upper face.
  EdgeId edge_up(Vertex v, int axis) const { return slot_to_edge_[v * d_ + axis]; }
  EdgeId edge_down(Vertex v, int axis) const {
    const Vertex u = v - stride_[axis];
    return u >= 0 ? slot_to_edge_[u * d_ + axis] : kNoEdge;
  }
  int edge_axis(EdgeId e) const { return static_cast<int>(e / per_axis_); }
  // Lexicographically smaller endpoint x_e.
  Vertex edge_base(EdgeId e) const { return edge_to_slot_[e] / d_; }
  std::pair<Vertex, Vertex> endpoints(EdgeId e) const {
    const Vertex x = edge_base(e);
    return {x, x + stride_[edge_axis(e)]};
  }
  EdgeId edge_between(Vertex u, Vertex v) const {
    if (u > v) std::swap(u, v);
    for (int a = 0; a < d_; ++a)
      if (v - u == stride_[a]) {
        const EdgeId e = edge_up(u, a);
        if (e != kNoEdge) return e;
      }
    return kNoEdge;
  }

  // fn(neighbour, edge) for every lattice neighbour of v inside the box.
  template <class Fn>
  void for_each_neighbor(Vertex v, Fn&& fn) const {
    for (int a = 0; a < d_; ++a) {
      const EdgeId up = slot_to_edge_[v * d_ + a];
      if (up != kNoEdge) fn(v + stride_[a], up);
      const EdgeId down = edge_down(v, a);
      if (down != kNoEdge) fn(v - stride_[a], down);
    }
  }

  bool on_boundary(Vertex v) const {
    for (int a = 0; a < d_; ++a) {
      const int c = coord(v, a);
      if (c == -side_ || c == side_) return true;
    }
    return false;
  }

  int dist_inf(Vertex u, Vertex v) const {
    int m = 0;
    for (int a = 0; a < d_; ++a) m = std::max(m, std::abs(coord(u, a) - coord(v, a)));
    return m;
  }

  // Λ_r(center) clipped to the box; `clipped` reports whether clipping occurred.
  Box window(Vertex center, int r, bool* clipped = nullptr) const {
    Box b{Coord(static_cast<std::size_t>(d_)), Coord(static_cast<std::size_t>(d_))};
    bool clip = false;
    for (int a = 0; a < d_; ++a) {
      const int c = coord(center, a);
      b.lo[a] = c - r;
      b.hi[a] = c + r;
      if (b.lo[a] < -side_) { b.lo[a] = -side_; clip = true; }
      if (b.hi[a] > side_) { b.hi[a] = side_; clip = true; }
    }
    if (clipped) *clipped = clip;
    return b;
  }
  bool window_inside(Vertex center, int r) const {
    bool clipped = false;
    window(center, r, &clipped);
    return !clipped;
  }

  // fn(v) for each vertex of a sub-box (which must lie inside the lattice),
  // in increasing index order.
  template <class Fn>
  void for_each_vertex(const Box& b, Fn&& fn) const {
    Coord c = b.lo;
    for (int a = 0; a < d_; ++a)
      if (b.lo[a] > b.hi[a]) return;
    while (true) {
      fn(vertex(c));
      int a = d_ - 1;
      for (; a >= 0; --a) {
        if (++c[a] <= b.hi[a]) break;
        c[a] = b.lo[a];
      }
      if (a < 0) return;
    }
  }

private:
  int d_;
  int side_;
  int width_;
  std::vector<Vertex> stride_;
  Vertex num_vertices_;
  EdgeId per_axis_;
  EdgeId num_edges_;
  std::vector<EdgeId> slot_to_edge_;
  std::vector<Vertex> edge_to_slot_;
  std::vector<int> coord_;  // by v * d + axis
};

struct EdgeWindow {
  std::vector<EdgeId> edges;
  bool clipped = false;
};

// Edges with both endpoints in Λ_radius(x_e), clipped at the box boundary.
inline EdgeWindow edge_window(const BoxLattice& lat, EdgeId e, int radius) {
  if (e < 0 || e >= lat.num_edges()) throw std::out_of_range("edge_window: invalid edge");
  if (radius < 1) throw std::invalid_argument("edge_window: radius must be >= 1");
  EdgeWindow w;
  const Box b = lat.window(lat.edge_base(e), radius, &w.clipped);
  lat.for_each_vertex(b, [&](Vertex v) {
    for (int a = 0; a < lat.dim(); ++a) {
      const EdgeId f = lat.edge_up(v, a);
      if (f != kNoEdge && lat.coord(v, a) + 1 <= b.hi[a]) w.edges.push_back(f);
    }
  });
  std::sort(w.edges.begin(), w.edges.end());
  return w;
}

inline BoxLattice build_lattice(const SimulationParams& prm) {
  validate(prm);
  return BoxLattice(prm.d, prm.box_side());
}

}  // namespace dynperc

#endif  // DYNPERC_LATTICE_HPP
