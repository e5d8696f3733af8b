#include <gtest/gtest.h>

#include <cmath>
#include <queue>

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

// Comparison-based Dijkstra, kept independent of the bucket engine.
std::int64_t dijkstra(const EnvironmentView& v, Vertex a, Vertex b) {
  const auto& lat = v.lattice();
  std::vector<std::int64_t> dist(static_cast<std::size_t>(lat.num_vertices()), -1);
  using Item = std::pair<std::int64_t, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.push({0, a});
  while (!pq.empty()) {
    const auto [d, x] = pq.top();
    pq.pop();
    if (dist[x] >= 0) continue;
    dist[x] = d;
    if (x == b) return d;
    lat.for_each_neighbor(x, [&](Vertex y, EdgeId e) {
      const int w = v.weight(e);
      if (w != kInfiniteWeight && dist[y] < 0) pq.push({d + w, y});
    });
  }
  return -1;
}

std::int64_t reference_value(const EnvironmentView& v, EdgeId e, bool open, Vertex z0, Vertex z1) {
  const auto over = v.with_state(e, open);
  const auto lab = label_clusters(over.with_mode(WeightMode::chemical));
  return dijkstra(over, regularize(over.lattice(), lab, z0).target, regularize(over.lattice(), lab, z1).target);
}

}  // namespace

TEST(DiscreteDerivative, EqualWeightsGiveZero) {
  auto lat = lattice(4);
  const auto env = CoupledEnvironment::constant(lat, true, true);
  SearchWorkspace ws;
  const auto v = view_at(env, 0, WeightMode::truncated, 5);
  const auto d = discrete_derivative(v, 5, 5, 3, lat->vertex({0, 0}), lat->vertex({2, 0}), ws);
  EXPECT_TRUE(d.defined);
  EXPECT_EQ(d.value, 0);
}

TEST(DiscreteDerivative, AllOpenUnitDetour) {
  auto lat = lattice(2);
  const auto env = CoupledEnvironment::constant(lat, true, true);
  SearchWorkspace ws;
  const auto v = view_at(env, 0, WeightMode::truncated, 5);
  const Vertex z0 = lat->vertex({0, 0}), z1 = lat->vertex({2, 0});
  const EdgeId e = lat->edge_between(lat->vertex({1, 0}), z1);
  const auto d = discrete_derivative(v, 5, 1, e, z0, z1, ws);
  EXPECT_TRUE(d.defined);
  EXPECT_EQ(d.value, 2);
  PassageEngine eng(v, z0, z1, ws);
  EXPECT_EQ(eng.derivative(e), 2);
}

TEST(DiscreteDerivative, ChemicalModeReregularizes) {
  auto lat = lattice(2);
  auto env = CoupledEnvironment::constant(lat, false, false);
  // the open graph is the corridor (0,0)-(1,0)-(2,0)
  const Vertex a = lat->vertex({0, 0}), m = lat->vertex({1, 0}), b = lat->vertex({2, 0});
  env.set_original(lat->edge_between(a, m), true);
  env.set_original(lat->edge_between(m, b), true);
  SearchWorkspace ws;
  const auto v = view_at(env, 0, WeightMode::chemical, 5);
  // closing (m,b) leaves {a,m} as the giant and b regularizes onto m
  const auto d = discrete_derivative(v, kInfiniteWeight, 1, lat->edge_between(m, b), a, b, ws);
  EXPECT_TRUE(d.defined);
  EXPECT_EQ(d.value, 1 - 2);
  EXPECT_THROW(discrete_derivative(v, 3, 1, 0, a, b, ws), std::invalid_argument);
}

TEST(PassageEngine, MatchesIndependentRecomputation) {
  auto lat = lattice(9);
  SearchWorkspace ws;
  const Vertex z0 = lat->vertex({-5, 0}), z1 = lat->vertex({5, 0});
  std::int64_t checked = 0;
  for (std::uint64_t k = 0; k < 8; ++k) {
    const auto env = sample(lat, 0.55 + 0.05 * static_cast<double>(k % 3), 7, k);
    for (double t : {0.0, 0.3}) {
      const auto v = view_at(env, t, WeightMode::truncated, 6);
      PassageEngine eng(v, z0, z1, ws);
      for (EdgeId e = 0; e < lat->num_edges(); ++e)
        for (bool open : {false, true}) {
          ASSERT_EQ(eng.value(e, open), reference_value(v, e, open, z0, z1)) << "edge " << e;
          ++checked;
        }
      for (EdgeId e = 0; e < lat->num_edges(); e += 5) {
        const auto d = discrete_derivative(v, 6, 1, e, z0, z1, ws);
        ASSERT_TRUE(d.defined);
        ASSERT_EQ(d.value, eng.derivative(e));
      }
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(CoInfluence, StructuralProperties) {
  auto lat = lattice(12);
  SearchWorkspace ws;
  const Vertex z0 = lat->vertex({-7, 0}), z1 = lat->vertex({7, 0});
  const int M = 6;
  int pivotal_both = 0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto env = sample(lat, 0.6, 8, k);
    PassageEngine e0(view_at(env, 0.0, WeightMode::truncated, M), z0, z1, ws);
    PassageEngine et(view_at(env, 0.2, WeightMode::truncated, M), z0, z1, ws);
    for (EdgeId e = 0; e < lat->num_edges(); ++e) {
      const auto r = co_influence(e0, et, e, true, false);
      if (r.q0 && r.qt) {
        ASSERT_GE(r.grad0, 0);
        ASSERT_GE(r.gradt, 0);
        ASSERT_LE(r.grad0, M);
        ASSERT_LE(r.gradt, M);
        if (r.tau_open && r.tau_t_open) {
          ASSERT_GE(r.inf, 0);
        }
        if (r.in_all0 && r.in_allt) {
          ASSERT_GE(r.inf, 1);
          ++pivotal_both;
        }
      }
      if (r.q0 && r.tau_open && !r.in_all0) {
        ASSERT_EQ(r.grad0, 0);
      }
      if (r.qt && r.tau_t_open && !r.in_allt) {
        ASSERT_EQ(r.gradt, 0);
      }
    }
    // an edge in a far corner, open in both views, is not pivotal
    const EdgeId corner = lat->edge_up(lat->vertex({-12, 12}), 0);
    auto env2 = env;
    env2.set_original(corner, true);
    env2.set_resampled(corner, true);
    PassageEngine f0(view_at(env2, 0.0, WeightMode::truncated, M), z0, z1, ws);
    PassageEngine ft(view_at(env2, 0.2, WeightMode::truncated, M), z0, z1, ws);
    if (!f0.summary().in_some(corner) && !ft.summary().in_some(corner)) {
      EXPECT_EQ(co_influence(f0, ft, corner, true, true).inf, 0);
    }
  }
  EXPECT_GT(pivotal_both, 0);
}

TEST(CoInfluence, CoDerivativeMeanMatchesScaledInfluence) {
  // E[Δ_e] = p(1-p) E[Inf_e]; checked within 3σ of the difference estimator
  auto lat = lattice(8);
  SearchWorkspace ws;
  const Vertex z0 = lat->vertex({-4, 0}), z1 = lat->vertex({4, 0});
  const EdgeId e = lat->edge_up(lat->vertex({0, 0}), 0);
  const double p = 0.6;
  const int samples = 10000;
  double s = 0, ss = 0, mean_inf = 0;
  for (int k = 0; k < samples; ++k) {
    const auto env = sample(lat, p, 9, static_cast<std::uint64_t>(k));
    const auto r = co_influence(env, e, 0.3, 5, z0, z1, 9, p, ws);
    const double x = static_cast<double>(r.delta) - p * (1 - p) * static_cast<double>(r.inf);
    s += x;
    ss += x * x;
    mean_inf += static_cast<double>(r.inf);
  }
  const double mean = s / samples;
  const double sd = std::sqrt((ss / samples - mean * mean) / samples);
  EXPECT_GT(mean_inf / samples, 0.1);
  EXPECT_LE(std::abs(mean), 3 * sd + 1e-12);
}

TEST(TotalCoinfluence, SandwichAgainstOverlap) {
  auto lat = lattice(20);
  SearchWorkspace ws;
  const Vertex z0 = lat->vertex({-16, 0}), z1 = lat->vertex({16, 0});
  const Box window{{-19, -19}, {19, 19}};
  double total = 0, over = 0;
  double total_far = 0, over_far = 0;
  const int samples = 40;
  for (int k = 0; k < samples; ++k) {
    const auto env = sample(lat, 0.6, 10, static_cast<std::uint64_t>(k));
    const auto near = total_coinfluence(env, 0.05, 12, z0, z1, window, ws);
    const auto far = total_coinfluence(env, 1.0, 12, z0, z1, window, ws);
    total += static_cast<double>(near.sum_inf);
    over += static_cast<double>(near.overlap);
    total_far += static_cast<double>(far.sum_inf);
    over_far += static_cast<double>(far.overlap);
  }
  EXPECT_GE(total, over);
  EXPECT_LT(total_far, total);
  EXPECT_LT(over_far, over);
}
