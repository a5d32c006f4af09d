#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kmsf/spaceform.hpp"

namespace kmsf {

/// p + q sqrt(m) with m a positive non-square integer, or q = 0.
class QuadSurd {
 public:
  QuadSurd(Rational p = 0);  // NOLINT(google-explicit-constructor)
  QuadSurd(Rational p, Rational q, const Rational& radicand);
  /// sqrt(r) for r >= 0; DomainError otherwise.
  static QuadSurd sqrt(const Rational& r);

  const Rational& rational_part() const { return p_; }
  const Rational& surd_coefficient() const { return q_; }
  const Rational& radicand() const { return m_; }
  bool is_rational() const { return q_.is_zero(); }
  std::optional<Rational> rational_value() const;

  /// Exact sign by comparing p^2 with q^2 m.
  int sign() const;
  Expr to_expr() const;
  std::string str() const { return to_expr().str(); }

  friend QuadSurd operator+(const QuadSurd& a, const QuadSurd& b);
  friend QuadSurd operator-(const QuadSurd& a, const QuadSurd& b);
  friend QuadSurd operator*(const QuadSurd& a, const QuadSurd& b);
  friend QuadSurd operator/(const QuadSurd& a, const QuadSurd& b);
  friend QuadSurd operator-(const QuadSurd& a);
  friend bool operator==(const QuadSurd& a, const QuadSurd& b);

 private:
  /// Rewrites b over a's radicand (or adopts b's when a is rational).
  static Rational common_radicand(const QuadSurd& a, const QuadSurd& b);
  QuadSurd over(const Rational& m) const;

  Rational p_, q_, m_{0};
};

inline int sign_of(const Rational& r) { return r.sign(); }
inline int sign_of(const QuadSurd& s) { return s.sign(); }

// ------------------------------------------------------------- parameters

/// kappa, mu with lambda = sqrt(1 - kappa) and optional phi-sectional
/// curvature c and base sectional curvature c_s.
struct KmParams {
  Expr kappa;
  Expr mu;
  Expr lambda;
  std::optional<Expr> c;
  std::optional<Expr> c_s;

  /// DomainError when 1 - kappa is a negative constant.
  static KmParams of(const Expr& kappa, const Expr& mu);
};

/// (kappa + a^2 - 1)/a^2 and (mu + 2a - 2)/a.
template <class S>
KmValues<S> deform_km(const KmValues<S>& km, const S& a) {
  return {(km.kappa + a * a - S(1)) / (a * a), (km.mu + S(2) * a - S(2)) / a};
}

/// kappa, mu read off R(X, xi)xi = kappa X + mu hX on the legs orthogonal to
/// xi; nullopt when R(X,Y)xi has another shape. mu is 0 when h = 0.
std::optional<KmValues<Expr>> read_km(const AcmStructure& s);

// ------------------------------------------------------------ deformation

struct DeformationResult {
  Rational a;
  /// sqrt(a) when rational; the structure is rebuilt only then.
  std::optional<Rational> sqrt_a;
  KmValues<Expr> km;
  KmValues<Expr> deformed;
  /// Deformed structure on the rescaled frame; null in parameter-only mode.
  std::shared_ptr<const AcmStructure> structure;
  /// Contact metric residuals of the deformed structure.
  std::vector<Residual> contact;
  /// R(X,Y)xi of the deformed structure against the closed forms.
  std::vector<Residual> km_check;

  bool tensor_level() const { return structure != nullptr; }
  bool ok() const { return contact.empty() && km_check.empty(); }
};

enum class Rebuild { WhenRational, Always };

/// xi' = xi/a, eta' = a eta, phi' = phi, g' = a g + a(a-1) eta (x) eta.
/// The new frame is e_i/sqrt(a) on legs orthogonal to xi and xi/a; on a Lie
/// chart the structure constants are rescaled instead. Requires xi to be a
/// frame leg. With Rebuild::Always an irrational sqrt(a) is kept as a
/// symbolic root in the frame.
DeformationResult d_homothetic(const AcmStructure& s, const Rational& a,
                               DEtaConvention convention = DEtaConvention::Half,
                               Rebuild rebuild = Rebuild::WhenRational);
/// Parameter algebra only.
DeformationResult d_homothetic(const KmValues<Expr>& km, const Rational& a);

template <class S>
struct ChosenDeformation {
  S a;
  KmValues<S> deformed;
  /// -(kappa' + mu'), the constant phi-sectional curvature.
  S c;
};

/// a = (kappa - 1)/(mu - 2) making mu' = kappa' + 1. Throws InvalidArgument
/// for mu = 2, kappa >= 1 or a <= 0, and InternalInconsistency if mu' !=
/// kappa' + 1.
template <class S>
ChosenDeformation<S> choose_a(const S& kappa, const S& mu);

// ------------------------------------------------------------ construction

struct CsRoots {
  std::vector<QuadSurd> roots;
  /// Index of the root taken (the + branch of the closed form).
  int valid = 0;
};

/// Roots of (3 - f6) c^2 + (10 + 2 f6) c + (3 - f6) = 0. For f6 = 3 the
/// single root 0. Throws InvalidArgument for f6 <= -1.
CsRoots solve_cs(const Rational& f6);

struct Dim5System {
  Coeffs<Expr> f;
  Expr kappa, mu, c;
  /// The six equations of the combined system, each of which must vanish.
  std::array<Expr, 6> residuals;
  bool ok() const;
};

/// f = ((f6+1)/2, (f6-1)/2, (3f6+1)/2, 1, 1/2, f6), kappa = -f6,
/// mu = 1 - f6, c = 2 f6 - 1. f6 may be symbolic; a constant f6 <= -1 is
/// rejected.
Dim5System dim5_system(const Expr& f6);

struct Construction {
  Rational f6;
  CsRoots cs;
  QuadSurd c_s;
  KmValues<QuadSurd> km;
  ChosenDeformation<QuadSurd> deformation;
  Dim5System system;
  std::vector<CheckResult> checks;
  bool ok() const;
};

/// solve_cs, kappa = c_s(2 - c_s), mu = -2 c_s, choose_a, then compares the
/// deformed values with (-f6, 1 - f6, 2 f6 - 1) and dim5_system(f6).
Construction construct(const Rational& f6);

// --------------------------------------------------------- classification

enum class Label { SU2_or_SO3, SL2R_or_O12, E2, E11, Unclassified };
std::string to_string(Label l);

struct Classification {
  Label label = Label::Unclassified;
  QuadSurd lambda;
  /// 1 - lambda - mu/2 and 1 + lambda - mu/2.
  QuadSurd lower, upper;
  /// 2f1 + 3f2 - f3 + f4 - f6 = 0 and the two readings of mu, when a fit is given.
  std::vector<CheckResult> checks;
};

/// Lie group label from exact signs. kappa = 1 is Unclassified (both tests
/// coincide and the structure is Sasakian); kappa > 1 is InvalidArgument.
Classification classify_3d(const Rational& kappa, const Rational& mu, const Coeffs<Expr>* fit = nullptr);

}  // namespace kmsf
