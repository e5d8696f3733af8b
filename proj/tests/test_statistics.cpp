#include <gtest/gtest.h>

#include <numeric>

#include "dynperc/parallel.hpp"
#include "dynperc/rng.hpp"
#include "dynperc/statistics.hpp"

using namespace dynperc;

TEST(Statistics, BatchBoundsCoverEverything) {
  const auto b = batch_bounds(103, 20);
  ASSERT_EQ(b.size(), 21u);
  EXPECT_EQ(b.front(), 0u);
  EXPECT_EQ(b.back(), 103u);
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const auto w = b[i + 1] - b[i];
    EXPECT_TRUE(w == 5 || w == 6);
  }
  EXPECT_THROW(batch_bounds(10, 20), std::invalid_argument);
}

TEST(Statistics, MeanAndVarianceOfKnownSeries) {
  std::vector<double> x(400);
  std::iota(x.begin(), x.end(), 0.0);
  const Estimate m = mean_estimate(x);
  EXPECT_DOUBLE_EQ(m.value, 199.5);
  EXPECT_EQ(m.batches, kMinBatches);
  EXPECT_EQ(m.samples, 400);
  EXPECT_NEAR(variance_estimate(x).value, 400.0 * 401.0 / 12.0, 1e-9);
}

TEST(Statistics, StandardErrorShrinksLikeRootN) {
  RngStream r(7, StreamTag::edge_choice, 0);
  std::vector<double> small(400), big(40000);
  for (auto& v : small) v = r.uniform();
  for (auto& v : big) v = r.uniform();
  const double ratio = mean_estimate(small).se / mean_estimate(big).se;
  EXPECT_GT(ratio, 5.0);
  EXPECT_LT(ratio, 20.0);
  EXPECT_NEAR(mean_estimate(big).value, 0.5, 5 * mean_estimate(big).se);
}

TEST(Statistics, CorrelationWithItselfIsExactlyOne) {
  RngStream r(3, StreamTag::edge_choice, 1);
  std::vector<double> x(200);
  for (auto& v : x) v = r.uniform();
  const Estimate c = correlation_estimate(x, x);
  EXPECT_EQ(c.value, 1.0);
  EXPECT_EQ(c.se, 0.0);
  std::vector<double> flat(200, 2.0);
  EXPECT_THROW(correlation_estimate(flat, x), std::domain_error);
}

TEST(Statistics, LeastSquaresRecoversLine) {
  std::vector<double> x{0, 1, 2, 3, 4}, y;
  for (double v : x) y.push_back(3 - 0.5 * v);
  const LinearFit f = least_squares(x, y);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_NEAR(f.intercept, 3.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  auto run = [](int workers) {
    std::vector<std::uint64_t> out(257);
    Executor{workers}.run(out.size(), [&](std::size_t i, int) { out[i] = splitmix64(i * 31 + 7); });
    return out;
  };
  const auto a = run(1);
  EXPECT_EQ(a, run(2));
  EXPECT_EQ(a, run(5));
}

TEST(Parallel, SmallestFailingIndexWins) {
  for (int w : {1, 3}) {
    try {
      Executor{w}.run(100, [](std::size_t i, int) {
        if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      if (w == 1) {
        EXPECT_STREQ(e.what(), "17");
      }
    }
  }
  EXPECT_THROW(Executor{0}.run(1, [](std::size_t, int) {}), std::invalid_argument);
}
