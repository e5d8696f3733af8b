#ifndef DYNPERC_STATISTICS_HPP
#define DYNPERC_STATISTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace dynperc {

inline constexpr int kMinBatches = 20;

struct Estimate {
  double value = 0.0;
  double se = 0.0;  // batch-means standard error
  std::int64_t samples = 0;
  int batches = 0;

  double lo(double k) const { return value - k * se; }
  double hi(double k) const { return value + k * se; }
};

// Splits [0, n) into `batches` contiguous ranges whose sizes differ by at most one.
inline std::vector<std::size_t> batch_bounds(std::size_t n, int batches) {
  if (batches < 1 || n < static_cast<std::size_t>(batches))
    throw std::invalid_argument("batch means: need at least one sample per batch");
  std::vector<std::size_t> b(static_cast<std::size_t>(batches) + 1, 0);
  const std::size_t q = n / static_cast<std::size_t>(batches), r = n % static_cast<std::size_t>(batches);
  for (std::size_t i = 0; i < static_cast<std::size_t>(batches); ++i) b[i + 1] = b[i] + q + (i < r ? 1 : 0);
  return b;
}

// Point value of stat over all samples; the error is the spread of the
// per-batch values divided by sqrt(batches). Sums run in index order.
inline Estimate batch_statistic(std::size_t n, const std::function<double(std::size_t, std::size_t)>& stat,
                                int batches = kMinBatches) {
  const auto b = batch_bounds(n, batches);
  Estimate e;
  e.value = stat(0, n);
  e.samples = static_cast<std::int64_t>(n);
  e.batches = batches;
  double s = 0, ss = 0;
  for (int i = 0; i < batches; ++i) {
    const double v = stat(b[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i) + 1]);
    s += v;
    ss += v * v;
  }
  const double m = s / batches;
  const double var = batches > 1 ? (ss - batches * m * m) / (batches - 1) : 0.0;
  e.se = std::sqrt(std::max(0.0, var) / batches);
  return e;
}

inline double mean_of(std::span<const double> x, std::size_t a, std::size_t b) {
  double s = 0;
  for (std::size_t i = a; i < b; ++i) s += x[i];
  return b > a ? s / static_cast<double>(b - a) : 0.0;
}

// Sample covariance with denominator (count - 1).
inline double cov_of(std::span<const double> x, std::span<const double> y, std::size_t a, std::size_t b) {
  if (b - a < 2) return 0.0;
  const double mx = mean_of(x, a, b), my = mean_of(y, a, b);
  double s = 0;
  for (std::size_t i = a; i < b; ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(b - a - 1);
}

inline Estimate mean_estimate(std::span<const double> x, int batches = kMinBatches) {
  return batch_statistic(x.size(), [&](std::size_t a, std::size_t b) { return mean_of(x, a, b); }, batches);
}

inline Estimate variance_estimate(std::span<const double> x, int batches = kMinBatches) {
  return batch_statistic(x.size(), [&](std::size_t a, std::size_t b) { return cov_of(x, x, a, b); }, batches);
}

inline Estimate covariance_estimate(std::span<const double> x, std::span<const double> y, int batches = kMinBatches) {
  if (x.size() != y.size()) throw std::invalid_argument("covariance: length mismatch");
  return batch_statistic(x.size(), [&](std::size_t a, std::size_t b) { return cov_of(x, y, a, b); }, batches);
}

// Cov(x, y) / Var(x); exactly 1 when y is x. Batches use the linearized
// ratio r + (C_b - r V_b) / V, which stays defined when a short batch has no
// spread.
inline Estimate correlation_estimate(std::span<const double> x, std::span<const double> y,
                                     int batches = kMinBatches) {
  if (x.size() != y.size()) throw std::invalid_argument("correlation: length mismatch");
  const double v = cov_of(x, x, 0, x.size());
  if (!(v > 0)) throw std::domain_error("correlation: variance is zero");
  const double r = cov_of(x, y, 0, x.size()) / v;
  Estimate e = batch_statistic(
      x.size(),
      [&](std::size_t a, std::size_t b) {
        if (a == 0 && b == x.size()) return r;
        return r + (cov_of(x, y, a, b) - r * cov_of(x, x, a, b)) / v;
      },
      batches);
  return e;
}

// Difference of the means of two paired series.
inline Estimate paired_difference(std::span<const double> x, std::span<const double> y, int batches = kMinBatches) {
  if (x.size() != y.size()) throw std::invalid_argument("paired difference: length mismatch");
  return batch_statistic(
      x.size(), [&](std::size_t a, std::size_t b) { return mean_of(x, a, b) - mean_of(y, a, b); }, batches);
}

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  std::size_t points = 0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  LinearFit f;
  f.points = x.size();
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least squares: need two points");
  const double mx = mean_of(x, 0, x.size()), my = mean_of(y, 0, y.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace dynperc

#endif  // DYNPERC_STATISTICS_HPP
