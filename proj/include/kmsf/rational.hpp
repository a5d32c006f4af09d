#pragma once

#include <gmpxx.h>

#include <Eigen/Core>
#include <compare>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace kmsf {

/// Exact arbitrary-precision rational. A value type over mpq_class that never
/// hands out GMP expression templates, so it is safe inside generic code.
class Rational {
 public:
  Rational() = default;
  Rational(long v) : v_(v) {}  // NOLINT(google-explicit-constructor)
  Rational(int v) : v_(v) {}   // NOLINT(google-explicit-constructor)
  explicit Rational(const mpz_class& v) : v_(v) {}
  explicit Rational(const mpq_class& v) : v_(v) { v_.canonicalize(); }
  Rational(const mpz_class& num, const mpz_class& den);

  /// Parses "p", "-p" or "p/q" (decimal integers only).
  static Rational parse(std::string_view text);

  const mpq_class& get() const { return v_; }
  mpz_class num() const { return v_.get_num(); }
  mpz_class den() const { return v_.get_den(); }

  int sign() const { return sgn(v_); }
  bool is_zero() const { return sgn(v_) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }

  /// Exact square root when both numerator and denominator are squares.
  std::optional<Rational> sqrt() const;
  Rational pow(int exponent) const;
  Rational abs() const;

  std::string str() const;

  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a);

  friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) == 0; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.v_, b.v_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  mpq_class v_;
};

inline bool is_zero(const Rational& r) { return r.is_zero(); }

}  // namespace kmsf

namespace Eigen {

template <>
struct NumTraits<kmsf::Rational> : GenericNumTraits<kmsf::Rational> {
  using Real = kmsf::Rational;
  using NonInteger = kmsf::Rational;
  using Nested = kmsf::Rational;
  using Literal = kmsf::Rational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 40,
    MulCost = 60
  };
  static inline kmsf::Rational epsilon() { return 0; }
  static inline kmsf::Rational dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen
