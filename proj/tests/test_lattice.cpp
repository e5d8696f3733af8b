#include <gtest/gtest.h>

#include <set>

#include "dynperc/lattice.hpp"
#include "dynperc/rng.hpp"

using namespace dynperc;

TEST(BoxLattice, ThreeByThreeCounts) {
  BoxLattice lat(2, 1);
  EXPECT_EQ(lat.num_vertices(), 9);
  EXPECT_EQ(lat.num_edges(), 12);
}

TEST(BoxLattice, RejectsDimensionOne) {
  EXPECT_THROW(BoxLattice(1, 3), ParamError);
  SimulationParams prm;
  prm.d = 1;
  EXPECT_THROW(build_lattice(prm), ParamError);
}

TEST(BoxLattice, ThreeDimensionalEdgeCountByEnumeration) {
  BoxLattice lat(3, 2);
  EXPECT_EQ(lat.num_edges(), 300);
  std::set<std::pair<Vertex, Vertex>> pairs;
  for (Vertex v = 0; v < lat.num_vertices(); ++v)
    lat.for_each_neighbor(v, [&](Vertex u, EdgeId) { pairs.insert({std::min(u, v), std::max(u, v)}); });
  EXPECT_EQ(pairs.size(), 300u);
}

TEST(BoxLattice, EdgeIndexBijection) {
  for (int d : {2, 3}) {
    BoxLattice lat(d, 3);
    std::set<std::pair<Vertex, Vertex>> seen;
    for (EdgeId e = 0; e < lat.num_edges(); ++e) {
      const auto [x, y] = lat.endpoints(e);
      EXPECT_EQ(lat.dist_inf(x, y), 1);
      EXPECT_LT(x, y);
      EXPECT_EQ(lat.edge_between(x, y), e);
      EXPECT_EQ(lat.edge_between(y, x), e);
      EXPECT_TRUE(seen.insert({x, y}).second);
      EXPECT_EQ(lat.edge_base(e), x);
    }
    std::int64_t per_axis_sum = 0;
    for (int a = 0; a < d; ++a) {
      std::int64_t k = 0;
      for (EdgeId e = 0; e < lat.num_edges(); ++e) k += lat.edge_axis(e) == a;
      per_axis_sum += k;
    }
    EXPECT_EQ(per_axis_sum, lat.num_edges());
  }
}

TEST(BoxLattice, VertexOrderIsLexicographic) {
  BoxLattice lat(2, 2);
  for (Vertex v = 0; v + 1 < lat.num_vertices(); ++v) EXPECT_LT(lat.coords(v), lat.coords(v + 1));
  const Coord c{1, -2};
  EXPECT_EQ(lat.coords(lat.vertex(c)), c);
}

TEST(EdgeWindow, RadiusCoveringBoxGivesAllEdges) {
  BoxLattice lat(2, 3);
  for (EdgeId e : {EdgeId{0}, lat.num_edges() / 2, lat.num_edges() - 1}) {
    const auto w = edge_window(lat, e, 2 * lat.side());
    EXPECT_EQ(static_cast<EdgeId>(w.edges.size()), lat.num_edges());
  }
}

TEST(EdgeWindow, InteriorRadiusOneHasTwelveEdges) {
  BoxLattice lat(2, 4);
  const EdgeId e = lat.edge_up(lat.vertex({0, 0}), 0);
  const auto w = edge_window(lat, e, 1);
  EXPECT_EQ(w.edges.size(), 12u);
  EXPECT_FALSE(w.clipped);
}

TEST(EdgeWindow, ClippedNearBoundary) {
  BoxLattice lat(2, 4);
  const EdgeId e = lat.edge_up(lat.vertex({4, 0}), 1);
  EXPECT_TRUE(edge_window(lat, e, 1).clipped);
  EXPECT_THROW(edge_window(lat, e, 0), std::invalid_argument);
}

TEST(Params, ValidationMessagesNameTheKey) {
  SimulationParams prm;
  prm.p = 1.5;
  try {
    validate(prm);
    FAIL();
  } catch (const ParamError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("p:", 0), 0u);
  }
  prm = {};
  prm.side = 10;
  EXPECT_THROW(validate(prm), ParamError);
  prm = {};
  prm.C_star = 4;
  EXPECT_EQ(validate(prm).size(), 1u);
}

TEST(Params, Defaults) {
  SimulationParams prm;
  EXPECT_EQ(prm.truncation(), 17);
  EXPECT_EQ(prm.radius_constant(), 16);
  EXPECT_EQ(prm.box_side(), 64 + 8);
  BoxLattice lat = build_lattice(prm);
  EXPECT_FALSE(lat.on_boundary(lat.vertex(prm.origin())));
  EXPECT_FALSE(lat.on_boundary(lat.vertex(prm.target())));
}

TEST(Rng, KeyedStreamsAreOrderIndependent) {
  RngStream a(7, StreamTag::locality, 3, 4), b(7, StreamTag::locality, 3, 4), c(7, StreamTag::locality, 3, 5);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  EXPECT_EQ(keyed_u64(1, StreamTag::open_original, 2, 3), keyed_u64(1, StreamTag::open_original, 2, 3));
}

TEST(Rng, ThresholdEdges) {
  EXPECT_FALSE(threshold_for(0.0).passes(0));
  EXPECT_TRUE(threshold_for(1.0).passes(~std::uint64_t{0}));
  const Threshold h = threshold_for(0.5);
  EXPECT_TRUE(h.passes((std::uint64_t{1} << 63) - 1));
  EXPECT_FALSE(h.passes(std::uint64_t{1} << 63));
}
