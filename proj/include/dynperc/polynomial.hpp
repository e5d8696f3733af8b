#ifndef DYNPERC_POLYNOMIAL_HPP
#define DYNPERC_POLYNOMIAL_HPP

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dynperc {

// Univariate polynomial with rational coefficients, c[k] multiplying x^k.
// Trailing zeros are trimmed, so equal polynomials compare equal.
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<mpq_class> c) : c_(std::move(c)) { trim(); }
  static Polynomial constant(const mpq_class& a) { return Polynomial({a}); }
  // a + b x
  static Polynomial linear(const mpq_class& a, const mpq_class& b) { return Polynomial({a, b}); }

  const std::vector<mpq_class>& coefficients() const { return c_; }
  mpq_class coefficient(std::size_t k) const { return k < c_.size() ? c_[k] : mpq_class(0); }
  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero

  mpq_class operator()(const mpq_class& x) const {
    mpq_class v = 0;
    for (std::size_t k = c_.size(); k-- > 0;) v = v * x + c_[k];
    return v;
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    trim();
    return *this;
  }
  Polynomial& operator*=(const mpq_class& a) {
    for (auto& x : c_) x *= a;
    trim();
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const mpq_class& s) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<mpq_class> c(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

  Polynomial derivative() const {
    std::vector<mpq_class> c;
    for (std::size_t k = 1; k < c_.size(); ++k) c.push_back(c_[k] * static_cast<unsigned long>(k));
    return Polynomial(std::move(c));
  }
  // Antiderivative vanishing at 0.
  Polynomial antiderivative() const {
    std::vector<mpq_class> c(c_.size() + 1);
    for (std::size_t k = 0; k < c_.size(); ++k) c[k + 1] = c_[k] / static_cast<unsigned long>(k + 1);
    return Polynomial(std::move(c));
  }
  // x -> ∫_x^1 P(s) ds
  Polynomial integral_to_one() const {
    const Polynomial F = antiderivative();
    return constant(F(1)) - F;
  }

  std::string str(const std::string& var = "t") const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = 0; k < c_.size(); ++k) {
      if (c_[k] == 0) continue;
      mpq_class a = c_[k];
      if (!first) os << (a < 0 ? " - " : " + ");
      else if (a < 0) os << "-";
      if (a < 0) a = -a;
      first = false;
      if (k == 0 || a != 1) os << a.get_str();
      if (k > 0) os << (k == 0 || a != 1 ? "*" : "") << var << (k > 1 ? "^" + std::to_string(k) : "");
    }
    return os.str();
  }

private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<mpq_class> c_;
};

// Lowest degree whose coefficients differ, if any.
inline std::optional<std::size_t> first_difference(const Polynomial& a, const Polynomial& b) {
  const std::size_t n = std::max(a.coefficients().size(), b.coefficients().size());
  for (std::size_t k = 0; k < n; ++k)
    if (a.coefficient(k) != b.coefficient(k)) return k;
  return std::nullopt;
}

}  // namespace dynperc

#endif  // DYNPERC_POLYNOMIAL_HPP
