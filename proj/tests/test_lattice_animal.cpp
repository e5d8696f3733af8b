#include <gtest/gtest.h>

#include <functional>

#include "dynperc/lattice_animal.hpp"

using namespace dynperc;

namespace {

std::shared_ptr<const BoxLattice> lattice(int d, int side) { return std::make_shared<const BoxLattice>(d, side); }

AnimalField constant_field(std::shared_ptr<const BoxLattice> lat, bool on) {
  AnimalField f;
  f.ind = BitVector(static_cast<std::size_t>(lat->num_edges()));
  if (on)
    for (EdgeId e = 0; e < lat->num_edges(); ++e) f.ind.set(static_cast<std::size_t>(e), true);
  f.q = on ? 1.0 : 0.0;
  f.lat = std::move(lat);
  return f;
}

// Plain enumeration of every self-avoiding path of length <= L.
int brute_animal(const AnimalField& f, int L) {
  const BoxLattice& lat = *f.lat;
  std::vector<char> used(static_cast<std::size_t>(lat.num_vertices()), 0);
  int best = 0;
  std::function<void(Vertex, int, int)> go = [&](Vertex v, int len, int score) {
    best = std::max(best, score);
    if (len == L) return;
    lat.for_each_neighbor(v, [&](Vertex y, EdgeId e) {
      if (used[y]) return;
      used[y] = 1;
      go(y, len + 1, score + (f(e) ? 1 : 0));
      used[y] = 0;
    });
  };
  const Vertex o = lat.vertex(Coord(static_cast<std::size_t>(lat.dim()), 0));
  used[o] = 1;
  go(o, 0, 0);
  return best;
}

void expect_self_avoiding_from_origin(const BoxLattice& lat, const std::vector<EdgeId>& w) {
  Vertex at = lat.vertex(Coord(static_cast<std::size_t>(lat.dim()), 0));
  std::vector<Vertex> seen{at};
  for (EdgeId e : w) {
    const auto [a, b] = lat.endpoints(e);
    ASSERT_TRUE(a == at || b == at);
    at = a == at ? b : a;
    EXPECT_EQ(std::find(seen.begin(), seen.end(), at), seen.end());
    seen.push_back(at);
  }
}

}  // namespace

TEST(Animal, ConstantFields) {
  auto lat = lattice(2, 10);
  for (int L : {0, 1, 5, 10}) {
    EXPECT_EQ(greedy_animal(constant_field(lat, true), L).value, L);
    EXPECT_EQ(greedy_animal(constant_field(lat, false), L).value, 0);
  }
}

TEST(Animal, BranchAndBoundMatchesEnumeration) {
  auto lat = lattice(2, 9);
  for (std::uint64_t k = 0; k < 12; ++k) {
    const AnimalField f = synthetic_field(lat, 1 + static_cast<int>(k % 3), 0.5, 0.5, 3, k);
    for (int L = 1; L <= 8; ++L) {
      const AnimalResult r = greedy_animal(f, L);
      ASSERT_TRUE(r.exact);
      EXPECT_EQ(r.value, brute_animal(f, L)) << "k=" << k << " L=" << L;
      EXPECT_LE(static_cast<int>(r.witness.size()), L);
      EXPECT_EQ(indicator_sum(f, r.witness), r.value);
      expect_self_avoiding_from_origin(*lat, r.witness);
    }
  }
}

TEST(Animal, BeamIsALowerBoundWithValidWitness) {
  auto lat = lattice(2, 12);
  const AnimalField f = synthetic_field(lat, 2, 0.6, 0.5, 9, 1);
  const AnimalResult exact = greedy_animal(f, 10);
  const AnimalResult beam = greedy_animal(f, 10, 0, 64);
  EXPECT_FALSE(beam.exact);
  EXPECT_LE(beam.value, exact.value);
  EXPECT_EQ(indicator_sum(f, beam.witness), beam.value);
  expect_self_avoiding_from_origin(*lat, beam.witness);
}

TEST(Animal, SyntheticMeanMatchesQ) {
  auto lat = lattice(2, 40);
  const AnimalField f = synthetic_field(lat, 3, 0.4, 0.5, 11, 0);
  EXPECT_DOUBLE_EQ(f.q, 0.2);
  std::int64_t on = 0;
  for (EdgeId e = 0; e < lat->num_edges(); ++e) on += f(e);
  const double freq = static_cast<double>(on) / static_cast<double>(lat->num_edges());
  EXPECT_NEAR(freq, 0.2, 0.03);
}

TEST(Animal, SyntheticFieldIsBlockDependent) {
  // An edge whose block draw fails is off whatever its own draw.
  auto lat = lattice(2, 20);
  const AnimalField a = synthetic_field(lat, 4, 0.5, 1.0, 5, 2);
  const AnimalField b = synthetic_field(lat, 4, 0.5, 0.5, 5, 2);
  for (EdgeId e = 0; e < lat->num_edges(); ++e)
    if (!a(e)) {
      EXPECT_FALSE(b(e));
    }
  // with q_edge = 1 every edge in a block shares one value
  for (EdgeId e = 0; e < lat->num_edges(); ++e)
    for (EdgeId g = e + 1; g < std::min<EdgeId>(e + 40, lat->num_edges()); ++g)
      if (detail::block_key(*lat, lat->edge_base(e), 4) == detail::block_key(*lat, lat->edge_base(g), 4))
      {
        EXPECT_EQ(a(e), a(g));
      }
}

TEST(Animal, RejectsOversizedL) {
  auto lat = lattice(2, 4);
  EXPECT_THROW(greedy_animal(constant_field(lat, true), 5), std::invalid_argument);
}

TEST(Animal, RadiusSquareMomentOnAllOpen) {
  auto lat = lattice(2, 40);
  SimulationParams prm;
  prm.p = 1.0;
  prm.side = 40;
  const auto env = sample_environment(lat, prm, 0);
  RadiusWorkspace ws;
  RadiusParams rp;
  const Vertex o = lat->vertex({0, 0});
  const std::vector<EdgeId> path{lat->edge_up(o, 0), lat->edge_up(o + lat->stride(0), 0)};
  // each edge has ĥr = C* on an all-open box
  const double h = rp.C_star;
  EXPECT_DOUBLE_EQ(radius_square_moment(env, 0.0, rp, path, ws), (2 * h * h) * (2 * h * h));
}
