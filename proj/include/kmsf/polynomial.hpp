#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "kmsf/rational.hpp"

namespace kmsf {

/// Index into the global symbol table. Smaller ids rank higher in the
/// lexicographic monomial order.
using VarId = std::uint32_t;

/// Power product stored sparsely as (variable, exponent) pairs sorted by id.
class Monomial {
 public:
  using Power = std::pair<VarId, std::uint32_t>;

  Monomial() = default;
  static Monomial variable(VarId v, std::uint32_t exponent = 1);

  const std::vector<Power>& powers() const { return powers_; }
  bool is_one() const { return powers_.empty(); }
  std::uint32_t degree(VarId v) const;
  std::uint32_t total_degree() const;

  bool divides(const Monomial& other) const;
  /// Monomial quotient; requires divides(other).
  Monomial quotient_of(const Monomial& other) const;
  Monomial with_degree(VarId v, std::uint32_t exponent) const;

  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial& a, const Monomial& b) = default;

  /// Lexicographic comparison: <0, 0, >0.
  static int compare(const Monomial& a, const Monomial& b);

 private:
  std::vector<Power> powers_;
};

struct MonomialGreater {
  bool operator()(const Monomial& a, const Monomial& b) const { return Monomial::compare(a, b) > 0; }
};

/// Sparse multivariate polynomial with integer coefficients. Terms are kept
/// in descending lex order, so the first term is the leading term.
class Polynomial {
 public:
  using Terms = std::map<Monomial, mpz_class, MonomialGreater>;

  Polynomial() = default;
  Polynomial(long c);  // NOLINT(google-explicit-constructor)
  explicit Polynomial(const mpz_class& c);
  static Polynomial variable(VarId v);
  static Polynomial term(const Monomial& m, const mpz_class& c);

  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  bool is_monomial() const { return terms_.size() == 1; }
  /// Value of a constant polynomial.
  mpz_class constant_value() const;

  const Monomial& leading_monomial() const { return terms_.begin()->first; }
  const mpz_class& leading_coefficient() const { return terms_.begin()->second; }

  /// Highest-ranked variable occurring, if any.
  std::optional<VarId> main_variable() const;
  bool contains(VarId v) const;
  std::uint32_t degree(VarId v) const;
  std::vector<VarId> variables() const;

  /// Coefficients with respect to v, dense by exponent.
  std::vector<Polynomial> coefficients(VarId v) const;
  static Polynomial from_coefficients(VarId v, const std::vector<Polynomial>& coeffs);

  /// Positive gcd of the integer coefficients (0 for the zero polynomial).
  mpz_class content() const;

  Polynomial derivative(VarId v) const;
  Polynomial pow(unsigned exponent) const;
  /// Replaces v by the polynomial p.
  Polynomial substitute(VarId v, const Polynomial& p) const;
  Rational evaluate(const std::function<Rational(VarId)>& value) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(const Polynomial& o);
  Polynomial& operator*=(const mpz_class& c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a);
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

 private:
  void add_term(const Monomial& m, const mpz_class& c);
  Terms terms_;
};

/// Exact quotient a / b; throws InternalInconsistency when b does not divide a.
Polynomial divide_exact(const Polynomial& a, const Polynomial& b);
/// Divides every coefficient by the integer c, which must divide them.
Polynomial divide_exact(const Polynomial& a, const mpz_class& c);

/// Greatest common divisor over Z[x...], normalized to a positive leading
/// coefficient. gcd(0, 0) = 0.
Polynomial gcd(const Polynomial& a, const Polynomial& b);

/// Square root when p is the square of an integer polynomial (root returned
/// with positive leading coefficient); nullopt otherwise.
std::optional<Polynomial> exact_sqrt(const Polynomial& p);

}  // namespace kmsf
