#ifndef DYNPERC_EXACT_ORACLE_HPP
#define DYNPERC_EXACT_ORACLE_HPP

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynperc/lattice.hpp"
#include "dynperc/polynomial.hpp"
#include "dynperc/rng.hpp"

namespace dynperc {

inline constexpr int kMaxOracleEdges = 12;

// Coordinates X_e ∈ {ℓ, L}, X_e = ℓ with probability p. A configuration is a
// bitmask whose bit e is set when X_e = ℓ. f is tabulated on all 2^n masks.
struct OracleInstance {
  int n = 0;
  mpq_class p{1, 2};
  mpq_class ell = 1, L = 2;
  std::vector<mpq_class> f;

  mpq_class value(std::uint32_t x, int e) const { return (x >> e) & 1U ? ell : L; }
};

class OracleFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void validate(const OracleInstance& in) {
  if (in.n < 0 || in.n > kMaxOracleEdges) throw ParamError("E: size must lie in [0, 12]");
  if (!(in.p > 0 && in.p < 1)) throw ParamError("p: must lie strictly between 0 and 1");
  if (in.ell > in.L) throw ParamError("ell: must not exceed L");
  if (in.f.size() != (std::size_t{1} << in.n)) throw ParamError("f: table must have 2^|E| entries");
  // with ℓ = L both labels are the same point, so f cannot tell them apart
  if (in.ell == in.L)
    for (const auto& v : in.f)
      if (v != in.f[0]) throw ParamError("f: must be constant when ell = L");
}

// Integers in [-4, 4] over denominators in [1, 3], keyed by (seed, index).
inline std::vector<mpq_class> random_table(int n, std::uint64_t seed, std::uint64_t index) {
  RngStream r(seed, StreamTag::oracle_table, index, static_cast<std::uint64_t>(n));
  std::vector<mpq_class> f(std::size_t{1} << n);
  for (auto& v : f) {
    const long num = static_cast<long>(r.below(9)) - 4;
    const long den = static_cast<long>(r.below(3)) + 1;
    v = mpq_class(num, den);
    v.canonicalize();
  }
  return f;
}

// f(x) = Σ_e X_e
inline std::vector<mpq_class> sum_table(int n, const mpq_class& ell, const mpq_class& L) {
  std::vector<mpq_class> f(std::size_t{1} << n);
  for (std::uint32_t x = 0; x < f.size(); ++x)
    for (int e = 0; e < n; ++e) f[x] += (x >> e) & 1U ? ell : L;
  return f;
}

// Resampling rate of one coordinate: never, a fixed rational, or the variable.
struct Rate {
  enum Kind { frozen, fixed, variable } kind = variable;
  mpq_class r = 0;
  static Rate never() { return {frozen, 0}; }
  static Rate at(const mpq_class& r) { return {fixed, r}; }
  static Rate symbolic() { return {variable, 0}; }
};

namespace detail {

inline std::vector<mpq_class> config_weights(int n, const mpq_class& p) {
  std::vector<mpq_class> w(std::size_t{1} << n, mpq_class(1));
  const mpq_class q = 1 - p;
  for (std::uint32_t x = 0; x < w.size(); ++x)
    for (int e = 0; e < n; ++e) w[x] *= (x >> e) & 1U ? p : q;
  return w;
}

// Replaces h by its average over coordinate j.
inline void marginalize(std::vector<mpq_class>& h, int j, const mpq_class& p) {
  const std::uint32_t bit = 1U << j;
  const mpq_class q = 1 - p;
  for (std::uint32_t x = 0; x < h.size(); ++x)
    if (!(x & bit)) {
      const mpq_class m = p * h[x | bit] + q * h[x];
      h[x] = m;
      h[x | bit] = m;
    }
}

}  // namespace detail

// E[g(X) h(Y)] as a polynomial in the symbolic rate, where Y is X with each
// coordinate j independently replaced by a fresh copy with probability rate[j].
// Enumerates every resample mask S with weight Π_{S} r_j Π_{S^c} (1 - r_j);
// for each S the inner sum runs over X and the fresh coordinates on S.
inline Polynomial pair_expectation(const std::vector<mpq_class>& g, const std::vector<mpq_class>& h,
                                   const std::vector<Rate>& rate, const mpq_class& p) {
  const int n = static_cast<int>(rate.size());
  if (g.size() != (std::size_t{1} << n) || h.size() != g.size())
    throw std::invalid_argument("pair_expectation: table size mismatch");
  const auto P = detail::config_weights(n, p);
  std::vector<mpq_class> gp(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) gp[x] = P[x] * g[x];
  Polynomial out;
  std::vector<std::vector<mpq_class>> stack(static_cast<std::size_t>(n) + 1);
  stack[0] = h;
  std::function<void(int, const Polynomial&)> go = [&](int j, const Polynomial& w) {
    const auto& H = stack[static_cast<std::size_t>(j)];
    if (j == n) {
      mpq_class a = 0;
      for (std::size_t x = 0; x < H.size(); ++x) a += gp[x] * H[x];
      out += w * a;
      return;
    }
    const Rate& r = rate[static_cast<std::size_t>(j)];
    const Polynomial keep = r.kind == Rate::variable ? Polynomial::linear(1, -1) : Polynomial::constant(1 - r.r);
    const Polynomial move = r.kind == Rate::variable ? Polynomial::linear(0, 1) : Polynomial::constant(r.r);
    auto& next = stack[static_cast<std::size_t>(j) + 1];
    if (r.kind == Rate::frozen || !keep.is_zero()) {
      next = H;
      go(j + 1, r.kind == Rate::frozen ? w : w * keep);
    }
    if (r.kind != Rate::frozen && !move.is_zero()) {
      next = stack[static_cast<std::size_t>(j)];
      detail::marginalize(next, j, p);
      go(j + 1, w * move);
    }
  };
  go(0, Polynomial::constant(1));
  return out;
}

inline mpq_class expectation(const std::vector<mpq_class>& f, int n, const mpq_class& p) {
  const auto P = detail::config_weights(n, p);
  mpq_class s = 0;
  for (std::size_t x = 0; x < f.size(); ++x) s += P[x] * f[x];
  return s;
}

// Cov(f(X), f(X(t))) as a polynomial in t.
inline Polynomial covariance_poly(const OracleInstance& in) {
  validate(in);
  const mpq_class m = expectation(in.f, in.n, in.p);
  return pair_expectation(in.f, in.f, std::vector<Rate>(static_cast<std::size_t>(in.n), Rate::symbolic()), in.p) -
         Polynomial::constant(m * m);
}

// ∇^{L,ℓ}_e f(x) = f(x with X_e = L) - f(x with X_e = ℓ); constant in coordinate e.
inline std::vector<mpq_class> gradient(const std::vector<mpq_class>& f, int e) {
  std::vector<mpq_class> g(f.size());
  const std::uint32_t bit = 1U << e;
  for (std::uint32_t x = 0; x < f.size(); ++x) g[x] = f[x & ~bit] - f[x | bit];
  return g;
}

// E[∇^{L,ℓ}_e f(X) ∇^{L,ℓ}_e f(X(s))] as a polynomial in s.
inline Polynomial coinfluence_poly(const OracleInstance& in, int e, std::vector<Rate> rate = {}) {
  if (rate.empty()) rate.assign(static_cast<std::size_t>(in.n), Rate::symbolic());
  rate[static_cast<std::size_t>(e)] = Rate::never();  // ∇_e f ignores coordinate e
  const auto g = gradient(in.f, e);
  return pair_expectation(g, g, rate, in.p);
}

// E[∇^{X_e,X^1_e}_e f(X) ∇^{X_e,X^2_e}_e f(Y)] with Y = X(rates) outside e and
// Y_e = X_e. X^1_e and X^2_e become two extra frozen coordinates n and n+1.
inline Polynomial copy_coinfluence_poly(const OracleInstance& in, int e, std::vector<Rate> rate = {}) {
  const int n = in.n;
  if (rate.empty()) rate.assign(static_cast<std::size_t>(n), Rate::symbolic());
  rate[static_cast<std::size_t>(e)] = Rate::never();
  rate.push_back(Rate::never());
  rate.push_back(Rate::never());
  const std::uint32_t low = (1U << n) - 1, bit = 1U << e;
  std::vector<mpq_class> g(std::size_t{1} << (n + 2)), h(g.size());
  for (std::uint32_t z = 0; z < g.size(); ++z) {
    const std::uint32_t x = z & low;
    const bool a = (z >> n) & 1U, b = (z >> (n + 1)) & 1U;
    g[z] = in.f[x] - in.f[a ? (x | bit) : (x & ~bit)];
    h[z] = in.f[x] - in.f[b ? (x | bit) : (x & ~bit)];
  }
  return pair_expectation(g, h, rate, in.p);
}

// t -> p(1-p) ∫_t^1 Σ_e E[∇f(X) ∇f(X(s))] ds
inline Polynomial representation_poly(const OracleInstance& in) {
  validate(in);
  Polynomial s;
  for (int e = 0; e < in.n; ++e) s += coinfluence_poly(in, e);
  return s.integral_to_one() * (in.p * (1 - in.p));
}

struct OracleCheck {
  std::string name;
  bool ok = true;
  std::string detail;  // offending monomial on failure
  Polynomial lhs, rhs;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.ok; });
  }
  const OracleCheck* first_failure() const {
    for (const auto& c : checks)
      if (!c.ok) return &c;
    return nullptr;
  }
  // Throws OracleFailure naming the first failed check.
  void require() const {
    if (const OracleCheck* c = first_failure()) throw OracleFailure(c->name + ": " + c->detail);
  }
  void append(const OracleReport& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

inline OracleCheck compare_polys(std::string name, Polynomial lhs, Polynomial rhs, const std::string& var = "t") {
  OracleCheck c;
  c.name = std::move(name);
  if (const auto k = first_difference(lhs, rhs)) {
    c.ok = false;
    c.detail = "coefficient of " + var + "^" + std::to_string(*k) + ": " + lhs.coefficient(*k).get_str() +
               " vs " + rhs.coefficient(*k).get_str();
  }
  c.lhs = std::move(lhs);
  c.rhs = std::move(rhs);
  return c;
}

inline OracleReport verify_representation(const OracleInstance& in) {
  validate(in);
  OracleReport rep;
  const Polynomial cov = covariance_poly(in);
  const mpq_class pq = in.p * (1 - in.p);
  Polynomial copies;
  for (int e = 0; e < in.n; ++e) {
    const Polynomial lhs = copy_coinfluence_poly(in, e);
    copies += lhs;
    rep.checks.push_back(
        compare_polys("copy co-influence, edge " + std::to_string(e), lhs, coinfluence_poly(in, e) * pq, "s"));
  }
  rep.checks.push_back(compare_polys("covariance vs integrated copy co-influence", cov, copies.integral_to_one()));
  rep.checks.push_back(compare_polys("covariance vs integrated co-influence", cov, representation_poly(in)));
  return rep;
}

// d/dp E[f(X)] against Σ_e E[∇^{ℓ,L}_e f(X)], both as polynomials in p.
inline OracleReport verify_russo(const OracleInstance& in) {
  validate(in);
  const int n = in.n;
  std::vector<Polynomial> w(std::size_t{1} << n, Polynomial::constant(1));
  for (std::uint32_t x = 0; x < w.size(); ++x)
    for (int e = 0; e < n; ++e) w[x] = w[x] * ((x >> e) & 1U ? Polynomial::linear(0, 1) : Polynomial::linear(1, -1));
  Polynomial mean, rhs;
  for (std::uint32_t x = 0; x < w.size(); ++x) {
    mean += w[x] * in.f[x];
    mpq_class grad = 0;
    for (int e = 0; e < n; ++e) grad += in.f[x | (1U << e)] - in.f[x & ~(1U << e)];
    rhs += w[x] * grad;
  }
  OracleReport rep;
  rep.checks.push_back(compare_polys("d/dp E[f] vs summed derivative", mean.derivative(), rhs, "p"));
  return rep;
}

struct MonotonicityCheck {
  int edge = 0;
  Polynomial phi;  // in t_e, other rates fixed
  mpq_class slope, coinfluence;
};

// φ(t_e) = E[h(X) h(X(t_e, (t_e')))] with the other rates fixed at `others`.
inline OracleReport verify_monotonicity(const OracleInstance& in, const std::vector<mpq_class>& h, int e,
                                        const std::vector<mpq_class>& others, MonotonicityCheck* out = nullptr) {
  OracleInstance hi = in;
  hi.f = h;
  validate(hi);
  if (others.size() != static_cast<std::size_t>(in.n)) throw std::invalid_argument("verify_monotonicity: rate count");
  std::vector<Rate> rate;
  for (const auto& r : others) rate.push_back(Rate::at(r));
  rate[static_cast<std::size_t>(e)] = Rate::symbolic();
  const Polynomial phi = pair_expectation(h, h, rate, in.p);
  const Polynomial co = copy_coinfluence_poly(hi, e, rate);
  OracleReport rep;
  OracleCheck deg;
  deg.name = "phi has degree at most 1, edge " + std::to_string(e);
  deg.ok = phi.degree() <= 1;
  if (!deg.ok) deg.detail = "degree " + std::to_string(phi.degree());
  deg.lhs = phi;
  rep.checks.push_back(deg);
  const mpq_class slope = phi.coefficient(1);
  rep.checks.push_back(compare_polys("phi slope vs minus copy co-influence, edge " + std::to_string(e),
                                     Polynomial::constant(slope), co * mpq_class(-1)));
  OracleCheck sign;
  sign.name = "phi slope non-positive, edge " + std::to_string(e);
  sign.ok = slope <= 0;
  if (!sign.ok) sign.detail = "slope " + slope.get_str();
  rep.checks.push_back(sign);
  // secant over [1/4, 3/4] equals the slope exactly
  const mpq_class a(1, 4), b(3, 4);
  rep.checks.push_back(compare_polys("phi secant equals slope, edge " + std::to_string(e),
                                     Polynomial::constant((phi(b) - phi(a)) / (b - a)), Polynomial::constant(slope)));
  if (out) *out = {e, phi, slope, co.coefficient(0)};
  return rep;
}

// Non-negative and non-increasing on t = k/(points-1).
inline OracleCheck covariance_shape(const Polynomial& cov, int points = 101) {
  OracleCheck c;
  c.name = "covariance non-negative and non-increasing on the grid";
  c.lhs = cov;
  mpq_class prev;
  for (int k = 0; k < points; ++k) {
    const mpq_class t(k, points - 1);
    const mpq_class v = cov(t);
    if (v < 0 || (k > 0 && v > prev)) {
      c.ok = false;
      c.detail = "at t=" + mpq_class(t).get_str() + " value " + v.get_str();
      return c;
    }
    prev = v;
  }
  return c;
}

// f on n coordinates placed at positions `where` of a larger index set.
inline OracleInstance embed(const OracleInstance& in, int n_big, const std::vector<int>& where) {
  if (static_cast<int>(where.size()) != in.n) throw std::invalid_argument("embed: position count");
  OracleInstance big = in;
  big.n = n_big;
  big.f.assign(std::size_t{1} << n_big, mpq_class(0));
  for (std::uint32_t z = 0; z < big.f.size(); ++z) {
    std::uint32_t x = 0;
    for (int i = 0; i < in.n; ++i)
      if ((z >> where[static_cast<std::size_t>(i)]) & 1U) x |= 1U << i;
    big.f[z] = in.f[x];
  }
  return big;
}

// Nested index sets E_0 ⊆ E_1 ⊆ ...: the representation and covariance of f
// (a function of the E_0 coordinates) agree at every level, and coordinates
// outside E_0 contribute the zero polynomial.
inline OracleReport verify_countable_limit(const OracleInstance& base, const std::vector<int>& sizes,
                                           std::uint64_t seed) {
  validate(base);
  OracleReport rep;
  const Polynomial cov0 = covariance_poly(base), rep0 = representation_poly(base);
  RngStream r(seed, StreamTag::oracle_table, 0x6e657374ULL, static_cast<std::uint64_t>(base.n));
  std::vector<int> where(static_cast<std::size_t>(base.n));
  std::iota(where.begin(), where.end(), 0);
  int n = base.n;
  for (int m : sizes) {
    if (m < n || m > kMaxOracleEdges) throw ParamError("sizes: must be non-decreasing and at most 12");
    // place the current coordinates at a random subset of the larger set
    std::vector<int> slots(static_cast<std::size_t>(m));
    std::iota(slots.begin(), slots.end(), 0);
    for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[r.below(i)]);
    for (auto& w : where) w = slots[static_cast<std::size_t>(w)];
    n = m;
    const OracleInstance big = embed(base, n, where);
    const std::string tag = "|E|=" + std::to_string(n);
    rep.checks.push_back(compare_polys("nested covariance, " + tag, covariance_poly(big), cov0));
    rep.checks.push_back(compare_polys("nested representation, " + tag, representation_poly(big), rep0));
    for (int e = 0; e < n; ++e)
      if (std::find(where.begin(), where.end(), e) == where.end())
        rep.checks.push_back(compare_polys("unused coordinate " + std::to_string(e) + ", " + tag,
                                           coinfluence_poly(big, e), Polynomial{}, "s"));
  }
  return rep;
}

inline OracleReport verify_all(const OracleInstance& in) {
  OracleReport rep = verify_representation(in);
  rep.append(verify_russo(in));
  rep.checks.push_back(covariance_shape(covariance_poly(in)));
  return rep;
}

}  // namespace dynperc

#endif  // DYNPERC_EXACT_ORACLE_HPP
