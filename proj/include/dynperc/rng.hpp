#ifndef DYNPERC_RNG_HPP
#define DYNPERC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace dynperc {

// Stream labels. Values are part of the output contract: changing one changes
// every sample drawn from that stream.
enum class StreamTag : std::uint64_t {
  open_original = 1,
  open_resampled = 2,
  resample_clock = 3,
  coderivative_first = 4,
  coderivative_second = 5,
  animal_block = 6,
  animal_edge = 7,
  locality = 8,
  oracle_table = 9,
  edge_choice = 10,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stateless keyed hash: one 64-bit word per (seed, tag, a, b). The value never
// depends on evaluation order, which is what makes sampling thread-count
// independent.
inline constexpr std::uint64_t keyed_u64(std::uint64_t seed, StreamTag tag, std::uint64_t a,
                                         std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ (b * 0xd1342543de82ef95ULL));
}

// Integer threshold such that (u < threshold) has probability exactly q for a
// uniform 64-bit u, up to the resolution 2^-64. `saturated` means every u passes.
struct Threshold {
  std::uint64_t value = 0;
  bool saturated = false;
  bool passes(std::uint64_t u) const { return saturated || u < value; }
};

inline Threshold threshold_for(double q) {
  if (!(q > 0.0)) return {0, false};
  if (q >= 1.0) return {0, true};
  const double scaled = std::ceil(std::ldexp(q, 64));
  if (scaled >= 18446744073709551616.0) return {0, true};
  return {static_cast<std::uint64_t>(scaled), false};
}

inline double to_unit(std::uint64_t u) { return static_cast<double>(u >> 11) * 0x1.0p-53; }

// Sequential generator for a labelled stream. Same (seed, label) always gives
// the same sequence.
class RngStream {
public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0)
      : state_(keyed_u64(seed, tag, a, b)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return to_unit((*this)()); }
  bool bernoulli(double q) { return threshold_for(q).passes((*this)()); }
  // Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do x = (*this)(); while (x >= limit);
    return x % bound;
  }

private:
  std::uint64_t state_;
};

}  // namespace dynperc

#endif  // DYNPERC_RNG_HPP
