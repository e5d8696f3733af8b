#include <gtest/gtest.h>

#include <queue>

#include "dynperc/effective_radius.hpp"
#include "dynperc/influence.hpp"

using namespace dynperc;

namespace {

std::shared_ptr<const BoxLattice> lattice(int side) { return std::make_shared<const BoxLattice>(2, side); }

CoupledEnvironment sample(std::shared_ptr<const BoxLattice> lat, double p, std::uint64_t seed, std::uint64_t k) {
  SimulationParams prm;
  prm.p = p;
  prm.side = lat->side();
  prm.seed = seed;
  return sample_environment(std::move(lat), prm, k);
}

EdgeId centre_edge(const BoxLattice& lat) { return lat.edge_up(lat.vertex({0, 0}), 0); }

// 𝒲_N straight from the definition: all pairs, plain breadth-first search.
bool brute_W(const EnvironmentView& v, EdgeId e, int N, int C) {
  const auto& lat = v.lattice();
  const Vertex x = lat.edge_base(e);
  std::vector<Vertex> box;
  lat.for_each_vertex(lat.window(x, 3 * N), [&](Vertex u) { box.push_back(u); });
  auto bfs = [&](Vertex s, int R) {
    std::vector<int> d(static_cast<std::size_t>(lat.num_vertices()), -1);
    std::queue<Vertex> q;
    d[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const Vertex a = q.front();
      q.pop();
      lat.for_each_neighbor(a, [&](Vertex b, EdgeId f) {
        if (d[b] < 0 && v.open(f) && lat.dist_inf(b, x) <= R) {
          d[b] = d[a] + 1;
          q.push(b);
        }
      });
    }
    return d;
  };
  for (Vertex s : box) {
    const auto d3 = bfs(s, 3 * N), d4 = bfs(s, 4 * N);
    for (Vertex y : box)
      if (d3[y] >= 0 && (d4[y] < 0 || d4[y] > C * N)) return false;
  }
  return true;
}

}  // namespace

TEST(EffectiveRadius, AllOpenIsOne) {
  auto lat = lattice(20);
  const auto env = CoupledEnvironment::constant(lat, true, true);
  RadiusWorkspace ws;
  const EdgeId e = centre_edge(*lat);
  const auto v = view_at(env, 0.0, WeightMode::truncated, 17);
  EXPECT_TRUE(check_W(v, e, 1, 16, ws));
  EXPECT_TRUE(check_V_surrogate(v, e, 1, 16, ws));
  EXPECT_TRUE(check_V_exact_n1(v, e, 16, ws));
  const auto r = radius(env, e, 0.5, {16, 17}, ws);
  EXPECT_FALSE(r.overflow);
  EXPECT_EQ(r.r, 1);
  EXPECT_EQ(r.hat_r, 16);
  ASSERT_EQ(r.holds.size(), 1u);
  EXPECT_EQ(r.holds[0], 15);
  EXPECT_EQ(radius(env, e, 0.5, {16, 5}, ws).hat_r, 5);
}

TEST(EffectiveRadius, AllClosed) {
  auto lat = lattice(20);
  const auto env = CoupledEnvironment::constant(lat, false, false);
  RadiusWorkspace ws;
  const EdgeId e = centre_edge(*lat);
  const auto v = view_at(env, 0.0, WeightMode::truncated, 17);
  EXPECT_TRUE(check_W(v, e, 1, 16, ws));  // vacuous
  EXPECT_FALSE(check_V_surrogate(v, e, 1, 16, ws));
  EXPECT_FALSE(check_V_exact_n1(v, e, 16, ws));
  const auto r = radius(env, e, 0.0, {16, 17}, ws);
  EXPECT_TRUE(r.overflow);
  EXPECT_EQ(r.hat_r, 17);
  EXPECT_THROW(check_W(v, lat->edge_up(lat->vertex({18, 0}), 1), 1, 16, ws), ClippedWindow);
}

TEST(EffectiveRadius, TwoCrossingClustersFailV) {
  auto lat = lattice(20);
  auto env = CoupledEnvironment::constant(lat, false, false);
  // two open radial spokes from level 2 to level 3 with nothing joining them
  for (int s : {-1, 1}) {
    const Vertex a = lat->vertex({2 * s, 0}), b = lat->vertex({3 * s, 0});
    env.set_original(lat->edge_between(a, b), true);
  }
  RadiusWorkspace ws;
  const auto v = view_at(env, 0.0, WeightMode::truncated, 17);
  EXPECT_FALSE(check_V_surrogate(v, centre_edge(*lat), 1, 16, ws));
  EXPECT_FALSE(check_V_exact_n1(v, centre_edge(*lat), 16, ws));
}

TEST(EffectiveRadius, WDetectsLongDetour) {
  // a U-shaped open path whose ends are adjacent but far apart along the path
  auto lat = lattice(30);
  auto env = CoupledEnvironment::constant(lat, false, false);
  auto open_line = [&](std::vector<int> from, std::vector<int> to) {
    Vertex cur = lat->vertex(from);
    const Vertex end = lat->vertex(to);
    while (cur != end) {
      Vertex next = cur;
      for (int a = 0; a < 2; ++a) {
        const int c = lat->coord(cur, a), g = lat->coord(end, a);
        if (c != g) {
          next = cur + (g > c ? 1 : -1) * lat->stride(a);
          break;
        }
      }
      env.set_original(lat->edge_between(cur, next), true);
      cur = next;
    }
  };
  open_line({0, 0}, {0, 5});
  open_line({0, 5}, {1, 5});
  open_line({1, 5}, {1, 0});
  RadiusWorkspace ws;
  const auto v = view_at(env, 0.0, WeightMode::truncated, 17);
  const EdgeId e = lat->edge_up(lat->vertex({0, 0}), 1);
  // at N = 2 the arm ends are joined only by the 11-edge U
  EXPECT_FALSE(check_W(v, e, 2, 4, ws));
  EXPECT_TRUE(check_W(v, e, 2, 16, ws));
}

TEST(EffectiveRadius, WMatchesAllPairsDefinition) {
  auto lat = lattice(40);
  RadiusWorkspace ws;
  int holds = 0, total = 0;
  for (std::uint64_t k = 0; k < 25; ++k) {
    const auto env = sample(lat, 0.6, 51, k);
    const auto v = view_at(env, 0.0, WeightMode::truncated, 17);
    const EdgeId e = lat->edge_up(lat->vertex({static_cast<int>(k % 5), 0}), 0);
    for (int N = 1; N <= 3; ++N)
      for (int C : {4, 16}) {
        const bool b = brute_W(v, e, N, C);
        ASSERT_EQ(check_W(v, e, N, C, ws), b) << "sample " << k << " N=" << N << " C=" << C;
        holds += b;
        ++total;
      }
  }
  EXPECT_GT(holds, 0);
  EXPECT_LT(holds, total);
}

TEST(EffectiveRadius, SurrogateSegmentsAreAdmissibleAtN1) {
  // every segment the surrogate uses at N = 1 is a radial edge that the
  // exact enumeration admits; the two verdicts mostly coincide
  auto lat = lattice(20);
  RadiusWorkspace ws;
  const EdgeId e = centre_edge(*lat);
  int agree = 0, total = 0;
  for (std::uint64_t k = 0; k < 60; ++k) {
    const auto env = sample(lat, 0.6, 21, k);
    const auto v = view_at(env, 0.0, WeightMode::truncated, 17);
    const Vertex x = lat->edge_base(e);
    const auto segs = geodesic_segments(v, x, 1, 16, ws);
    Rings rings(*lat, x);
    for (const auto& s : segs.segments) {
      ASSERT_EQ(s.size(), 2u);
      const EdgeId f = lat->edge_between(s[0], s[1]);
      ASSERT_NE(f, kNoEdge);
      if (!v.open(f)) {
        const Vertex src[1] = {s[0]};
        const auto w = search_weight(v);
        const Dist d = dial_search(*lat, ws.aux, src, 17, [&](EdgeId g) { return g == f ? -1 : w(g); },
                                   [&](Vertex y) { return rings.level(y) <= 16; }, 15, s[1]);
        ASSERT_EQ(d, kUnreachable);
      }
    }
    agree += check_V_surrogate(v, e, 1, 16, ws) == check_V_exact_n1(v, e, 16, ws);
    ++total;
  }
  EXPECT_GE(agree, total * 9 / 10);
}

TEST(EffectiveRadius, LocalityOfTheRadiusEvent) {
  auto lat = lattice(60);
  RadiusWorkspace ws;
  const RadiusParams prm{16, 17};
  const EdgeId e = centre_edge(*lat);
  int disagreements = 0;
  for (int ell : {1, 2, 3}) {
    for (std::uint64_t k = 0; k < 20; ++k) {
      const auto env = sample(lat, 0.6, 31, k);
      const auto other = perturb_outside(env, e, prm.C_star * ell, 31, k);
      disagreements += !locality_check(env, other, e, ell, 0.3, prm, ws);
    }
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(Bypass, AllOpenDetourAroundTheUnitBox) {
  auto lat = lattice(30);
  const auto env = CoupledEnvironment::constant(lat, true, true);
  RadiusWorkspace ws;
  const RadiusParams prm{16, 17};
  const auto v = view_at(env, 0.0, WeightMode::truncated, prm.M);
  const auto s = geodesic_summary(v, lat->vertex({-10, 0}), lat->vertex({10, 0}), ws.search);
  ASSERT_EQ(s.all.size(), 20u);
  const auto ok = verify_bypass(env, 0.0, s, prm, 16, ws);
  EXPECT_EQ(ok.violations, 0);
  EXPECT_GT(ok.checked, 0);
  for (const auto& be : ok.edges) {
    EXPECT_EQ(be.r, 1);
    EXPECT_EQ(be.extra, 8);
  }
  const auto tight = verify_bypass(env, 0.0, s, prm, 4, ws);
  EXPECT_EQ(tight.violations, tight.checked);
}

TEST(Bypass, DerivativeBoundedByRadiusOnRandomSamples) {
  auto lat = lattice(40);
  RadiusWorkspace ws;
  SearchWorkspace sws;
  const RadiusParams prm{16, 17};
  const Vertex z0 = lat->vertex({-8, 0}), z1 = lat->vertex({8, 0});
  std::int64_t checked = 0;
  for (std::uint64_t k = 0; k < 15; ++k) {
    const auto env = sample(lat, 0.6, 41, k);
    PassageEngine eng(view_at(env, 0.0, WeightMode::truncated, prm.M), z0, z1, sws);
    const auto rep = verify_bypass(env, 0.0, eng.summary(), prm, 16, ws);
    EXPECT_EQ(rep.violations, 0);
    for (const auto& be : rep.edges) {
      ASSERT_LE(eng.derivative(be.e), be.extra) << "edge " << be.e;
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}
