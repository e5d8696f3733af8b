#ifndef DYNPERC_ENVIRONMENT_HPP
#define DYNPERC_ENVIRONMENT_HPP

#include <array>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynperc/lattice.hpp"
#include "dynperc/rng.hpp"

namespace dynperc {

class BitVector {
public:
  BitVector() = default;
  explicit BitVector(std::size_t n, bool value = false)
      : size_(n), words_((n + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    trim();
  }
  std::size_t size() const { return size_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) words_[i >> 6] |= mask;
    else words_[i >> 6] &= ~mask;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }
  bool operator==(const BitVector&) const = default;

private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Per-edge triples (ω_e, ω'_e, U_e) on a finite box. ω is stored as an "open"
// bit; U_e as a 64-bit word read as U_e = word / 2^64.
class CoupledEnvironment {
public:
  CoupledEnvironment(std::shared_ptr<const BoxLattice> lattice, BitVector open_original,
                     BitVector open_resampled, std::vector<std::uint64_t> clocks,
                     std::uint64_t sample_index, std::uint64_t generation)
      : lattice_(std::move(lattice)),
        open0_(std::move(open_original)),
        open1_(std::move(open_resampled)),
        clock_(std::move(clocks)),
        sample_index_(sample_index),
        generation_(generation) {
    const auto m = static_cast<std::size_t>(lattice_->num_edges());
    if (open0_.size() != m || open1_.size() != m || clock_.size() != m)
      throw std::invalid_argument("CoupledEnvironment: field sizes do not match the lattice");
  }

  // Every edge in the given states, U_e = 2^-1 for all e. For constructed
  // instances in tests and tools.
  static CoupledEnvironment constant(std::shared_ptr<const BoxLattice> lattice, bool open_original,
                                     bool open_resampled) {
    const auto m = static_cast<std::size_t>(lattice->num_edges());
    return CoupledEnvironment(lattice, BitVector(m, open_original), BitVector(m, open_resampled),
                              std::vector<std::uint64_t>(m, std::uint64_t{1} << 63), 0,
                              fresh_generation());
  }

  const BoxLattice& lattice() const { return *lattice_; }
  std::shared_ptr<const BoxLattice> lattice_ptr() const { return lattice_; }
  bool open_original(EdgeId e) const { return open0_.test(static_cast<std::size_t>(e)); }
  bool open_resampled(EdgeId e) const { return open1_.test(static_cast<std::size_t>(e)); }
  std::uint64_t clock(EdgeId e) const { return clock_[static_cast<std::size_t>(e)]; }
  const BitVector& original_bits() const { return open0_; }
  const BitVector& resampled_bits() const { return open1_; }
  const std::vector<std::uint64_t>& clocks() const { return clock_; }
  std::uint64_t sample_index() const { return sample_index_; }
  std::uint64_t generation() const { return generation_; }

  // Mutators for building instances by hand; each changes the generation tag.
  void set_original(EdgeId e, bool open) {
    open0_.set(static_cast<std::size_t>(e), open);
    bump();
  }
  void set_resampled(EdgeId e, bool open) {
    open1_.set(static_cast<std::size_t>(e), open);
    bump();
  }
  void set_clock(EdgeId e, std::uint64_t u) {
    clock_[static_cast<std::size_t>(e)] = u;
    bump();
  }
  void set_clock(EdgeId e, double u) {
    set_clock(e, static_cast<std::uint64_t>(std::ldexp(u, 64) >= 18446744073709551615.0
                                                ? std::numeric_limits<std::uint64_t>::max()
                                                : std::ldexp(u, 64)));
  }

  static std::uint64_t fresh_generation() {
    static std::atomic<std::uint64_t> counter{0x1234};
    return splitmix64((counter.fetch_add(1) + 1) ^ 0xfeedULL);
  }

private:
  void bump() { generation_ = splitmix64(generation_ ^ 0xa5a5a5a5ULL); }

  std::shared_ptr<const BoxLattice> lattice_;
  BitVector open0_, open1_;
  std::vector<std::uint64_t> clock_;
  std::uint64_t sample_index_;
  std::uint64_t generation_;
};

inline std::uint64_t params_hash(const SimulationParams& prm) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(prm.d));
  h = splitmix64(h ^ static_cast<std::uint64_t>(prm.box_side()));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(prm.p));
  return splitmix64(h ^ prm.seed);
}

// Deterministic in (seed, sample_index, edge): the three fields use disjoint
// keyed streams.
inline CoupledEnvironment sample_environment(std::shared_ptr<const BoxLattice> lattice,
                                             const SimulationParams& prm,
                                             std::uint64_t sample_index) {
  const auto m = static_cast<std::size_t>(lattice->num_edges());
  BitVector open0(m), open1(m);
  std::vector<std::uint64_t> clocks(m);
  const Threshold thr = threshold_for(prm.p);
  for (std::size_t e = 0; e < m; ++e) {
    open0.set(e, thr.passes(keyed_u64(prm.seed, StreamTag::open_original, sample_index, e)));
    open1.set(e, thr.passes(keyed_u64(prm.seed, StreamTag::open_resampled, sample_index, e)));
    clocks[e] = keyed_u64(prm.seed, StreamTag::resample_clock, sample_index, e);
  }
  const std::uint64_t gen = splitmix64(params_hash(prm) ^ splitmix64(sample_index));
  return CoupledEnvironment(std::move(lattice), std::move(open0), std::move(open1),
                            std::move(clocks), sample_index, gen);
}

enum class WeightMode { chemical, truncated };
inline constexpr int kInfiniteWeight = std::numeric_limits<int>::max();

inline const char* to_string(WeightMode m) {
  return m == WeightMode::chemical ? "chemical" : "truncated";
}

// The t-noise environment seen through one of the two weight maps. Holds a
// pointer to its parent; the parent must outlive the view.
class EnvironmentView {
public:
  static constexpr int kMaxOverrides = 4;

  EnvironmentView(const CoupledEnvironment& env, double t, WeightMode mode, int M)
      : env_(&env), t_(t), clock_threshold_(threshold_for(t)), mode_(mode), M_(M) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("view_at: t must lie in [0,1]");
    if (mode == WeightMode::truncated && M < 2)
      throw std::invalid_argument("view_at: truncation level must be >= 2");
  }

  const CoupledEnvironment& environment() const { return *env_; }
  const BoxLattice& lattice() const { return env_->lattice(); }
  double t() const { return t_; }
  WeightMode mode() const { return mode_; }
  int truncation() const { return M_; }
  int closed_weight() const { return mode_ == WeightMode::chemical ? kInfiniteWeight : M_; }
  int max_finite_weight() const { return mode_ == WeightMode::chemical ? 1 : M_; }

  // U_e < t: the edge shows its resampled state.
  bool resampled(EdgeId e) const { return clock_threshold_.passes(env_->clock(e)); }

  bool open(EdgeId e) const {
    for (int i = 0; i < num_overrides_; ++i)
      if (overrides_[i].edge == e) return overrides_[i].open;
    return resampled(e) ? env_->open_resampled(e) : env_->open_original(e);
  }
  int weight(EdgeId e) const { return open(e) ? 1 : closed_weight(); }

  bool valid_weight(int a) const { return a == 1 || a == closed_weight(); }

  // σ_e^a: identical to this view except at e.
  EnvironmentView override(EdgeId e, int a) const {
    if (!valid_weight(a))
      throw std::invalid_argument("override: weight " + std::to_string(a) + " is not valid in " +
                                  to_string(mode_) + " mode");
    return with_state(e, a == 1);
  }
  EnvironmentView with_state(EdgeId e, bool open_state) const {
    EnvironmentView v = *this;
    for (int i = 0; i < v.num_overrides_; ++i)
      if (v.overrides_[i].edge == e) {
        v.overrides_[i].open = open_state;
        return v;
      }
    if (v.num_overrides_ == kMaxOverrides) throw std::length_error("override: too many stacked overrides");
    v.overrides_[v.num_overrides_++] = {e, open_state};
    return v;
  }
  EnvironmentView with_mode(WeightMode mode) const {
    EnvironmentView v = *this;
    v.mode_ = mode;
    return v;
  }
  int num_overrides() const { return num_overrides_; }
  std::uint64_t generation() const { return env_->generation(); }

private:
  struct Override {
    EdgeId edge = kNoEdge;
    bool open = false;
  };
  const CoupledEnvironment* env_;
  double t_;
  Threshold clock_threshold_;
  WeightMode mode_;
  int M_;
  std::array<Override, kMaxOverrides> overrides_{};
  int num_overrides_ = 0;
};

inline EnvironmentView view_at(const CoupledEnvironment& env, double t, WeightMode mode, int M) {
  return EnvironmentView(env, t, mode, M);
}

// Binary record: magic, version, params hash, geometry, then the three arrays
// as little-endian 64-bit words.
namespace detail {
inline constexpr char kEnvMagic[8] = {'D', 'P', 'E', 'N', 'V', '0', '0', '1'};
inline void put_u64(std::ostream& os, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}
inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("environment record truncated");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return x;
}
}  // namespace detail

inline void dump_environment(const CoupledEnvironment& env, std::uint64_t phash, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("dump_environment: cannot open " + path);
  os.write(detail::kEnvMagic, 8);
  detail::put_u64(os, phash);
  detail::put_u64(os, static_cast<std::uint64_t>(env.lattice().dim()));
  detail::put_u64(os, static_cast<std::uint64_t>(env.lattice().side()));
  detail::put_u64(os, env.sample_index());
  detail::put_u64(os, env.generation());
  detail::put_u64(os, static_cast<std::uint64_t>(env.lattice().num_edges()));
  for (auto w : env.original_bits().words()) detail::put_u64(os, w);
  for (auto w : env.resampled_bits().words()) detail::put_u64(os, w);
  for (auto u : env.clocks()) detail::put_u64(os, u);
  if (!os) throw std::runtime_error("dump_environment: write failed for " + path);
}

// Rebuilds the lattice from the record; rejects a record whose params hash
// differs from `expected_hash` unless expected_hash is 0.
inline CoupledEnvironment load_environment(const std::string& path, std::uint64_t expected_hash = 0) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_environment: cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, detail::kEnvMagic, 8) != 0)
    throw std::runtime_error("load_environment: not an environment record");
  const std::uint64_t phash = detail::get_u64(is);
  if (expected_hash != 0 && phash != expected_hash)
    throw std::runtime_error("load_environment: parameter hash mismatch");
  const auto d = static_cast<int>(detail::get_u64(is));
  const auto side = static_cast<int>(detail::get_u64(is));
  const std::uint64_t sample = detail::get_u64(is);
  const std::uint64_t gen = detail::get_u64(is);
  const std::uint64_t m = detail::get_u64(is);
  auto lat = std::make_shared<const BoxLattice>(d, side);
  if (static_cast<std::uint64_t>(lat->num_edges()) != m)
    throw std::runtime_error("load_environment: edge count does not match geometry");
  BitVector a(m), b(m);
  for (auto& w : a.words()) w = detail::get_u64(is);
  for (auto& w : b.words()) w = detail::get_u64(is);
  std::vector<std::uint64_t> clocks(m);
  for (auto& u : clocks) u = detail::get_u64(is);
  return CoupledEnvironment(std::move(lat), std::move(a), std::move(b), std::move(clocks), sample, gen);
}

}  // namespace dynperc

#endif  // DYNPERC_ENVIRONMENT_HPP
