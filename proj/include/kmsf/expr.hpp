#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

#include "kmsf/polynomial.hpp"
#include "kmsf/rational.hpp"

namespace kmsf {

/// Assignment of exact rational values to named symbols.
using Point = std::map<std::string, Rational>;

/// Exact symbolic scalar.
///
/// Every Expr is held in canonical form: a quotient num/den of integer
/// polynomials with gcd(num, den) = 1 and a positive leading coefficient in
/// den. Square roots that do not simplify are opaque atoms `sqrt(r)`;
/// numerators are reduced to degree <= 1 in every atom and denominators are
/// rationalized, so two Exprs are equal as functions iff they are
/// structurally equal (for algebraically independent atoms).
///
/// Values are immutable and cheap to copy; they can be shared across threads.
class Expr {
 public:
  Expr();
  Expr(long v);             // NOLINT(google-explicit-constructor)
  Expr(int v);              // NOLINT(google-explicit-constructor)
  Expr(const Rational& v);  // NOLINT(google-explicit-constructor)

  static Expr symbol(std::string_view name);
  /// Square root. Perfect squares of rational functions are rewritten to
  /// the root with positive leading coefficient; a negative constant
  /// radicand raises DomainError.
  static Expr sqrt(const Expr& radicand);
  /// Infix syntax: + - * / ^integer, parentheses, sqrt(...), integer
  /// literals and identifiers.
  static Expr parse(std::string_view text);

  bool is_zero() const;
  bool is_constant() const;
  std::optional<Rational> constant_value() const;
  /// Names of the plain symbols this expression depends on (radicands
  /// included).
  std::set<std::string> free_symbols() const;

  const Polynomial& numerator() const;
  const Polynomial& denominator() const;

  /// Partial derivative with respect to a plain symbol.
  Expr diff(std::string_view symbol) const;
  /// Exact value at a point. Throws DomainError (vanishing denominator,
  /// negative radicand, unassigned symbol) or IrrationalAtPoint.
  Rational eval(const Point& point) const;
  /// Replaces a plain symbol by an expression.
  Expr substitute(std::string_view symbol, const Expr& value) const;
  /// Replaces any subset of the plain symbols by rationals; others remain.
  Expr partial_eval(const Point& point) const;

  Expr pow(int exponent) const;

  /// Canonical print form; Expr::parse(e.str()) == e.
  std::string str() const;

  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr& operator*=(const Expr& o);
  Expr& operator/=(const Expr& o);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  friend std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << e.str(); }

  struct Rep;

 private:
  explicit Expr(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
  /// Canonicalizes num/den. When `cancel_within` is given, the caller
  /// guarantees gcd(num, den) divides it (absent atom reductions).
  static Expr make(Polynomial num, Polynomial den, const Polynomial* cancel_within = nullptr);

  std::shared_ptr<const Rep> rep_;
};

inline bool is_zero(const Expr& e) { return e.is_zero(); }

/// Name of a variable id (plain symbol or "sqrt(...)").
std::string variable_name(VarId v);

}  // namespace kmsf

namespace Eigen {

template <>
struct NumTraits<kmsf::Expr> : GenericNumTraits<kmsf::Expr> {
  using Real = kmsf::Expr;
  using NonInteger = kmsf::Expr;
  using Nested = kmsf::Expr;
  using Literal = kmsf::Expr;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 200,
    MulCost = 400
  };
  static inline kmsf::Expr epsilon() { return 0; }
  static inline kmsf::Expr dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen
