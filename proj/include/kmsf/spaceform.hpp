#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kmsf/acm.hpp"
#include "kmsf/check.hpp"

namespace kmsf {

/// Coefficients (f1, ..., f6), zero-based.
template <class S>
using Coeffs = std::array<S, 6>;

/// The six block tensors R1..R6 as (0,4) arrays R_i(a,b,c,d) = g(R_i(e_a,e_b)e_c, e_d).
/// R4 is the tensor linear in h and R5 the quadratic one.
template <class S>
struct BlockTensors {
  std::array<Tensor4<S>, 6> r;
  const Tensor4<S>& operator[](int i) const { return r[i]; }
};

template <class S>
BlockTensors<S> build_blocks(const Mat<S>& phi, const Vec<S>& xi, const Mat<S>& h);
BlockTensors<Expr> build_blocks(const AcmStructure& s);

/// sum_i f_i R_i.
template <class S>
Tensor4<S> combine(const BlockTensors<S>& blocks, const Coeffs<S>& f);

/// T(X,Y,Z,W) for frame-component vectors.
template <class S>
S contract(const Tensor4<S>& t, const Vec<S>& x, const Vec<S>& y, const Vec<S>& z, const Vec<S>& w);

/// P(X,Y,Z,W) = F(X,Z)g(Y,W) - F(X,W)g(Y,Z) - F(Y,Z)g(X,W) + F(Y,W)g(X,Z)
/// with F(a,c) = form(a,c). With form = phi this is P; with d eta it is P~.
template <class S>
Tensor4<S> p_tensor(const Mat<S>& form);

// ---------------------------------------------------------------- fitting

enum class Gauge { None, ThreeDReduced };
std::string to_string(Gauge g);
Gauge parse_gauge(const std::string& s);

struct PointFit {
  enum class State { Ok, NoFit, DomainError, Irrational };
  Point point;
  State state = State::Ok;
  /// Solution with free coefficients set to zero; in the reduced gauge
  /// f2 = f5 = f6 = 0.
  Coeffs<Rational> f{};
  /// Null space of the full six-column system (columns are directions).
  Mat<Rational> kernel;
  /// Indices (a,b,c,d) of a component that no combination can match.
  std::vector<int> inconsistent;
  std::string message;

  bool ok() const { return state == State::Ok; }
};

struct SpaceFormFit {
  Gauge gauge = Gauge::None;
  std::vector<PointFit> points;

  bool ok() const;
  /// Throws NoFit naming the first failing point.
  void require() const;
};

/// Pointwise exact fit. Points are independent and run on up to `jobs`
/// threads; results come back in input order.
SpaceFormFit fit_coefficients(const FrameGeometry& geo, const BlockTensors<Expr>& blocks,
                              const std::vector<Point>& points, Gauge gauge, int jobs = 1);

/// Entries of sum f_i R_i - R that do not vanish.
std::vector<Residual> ansatz_residuals(const CurvatureTensor& r, const BlockTensors<Expr>& blocks,
                                       const Coeffs<Expr>& f);

/// The 3-D gauge directions (f1..f6): (-1,1/3,-1,0,0,0), (0,0,0,1,0,1), (0,0,0,0,1,0).
Mat<Rational> gauge_directions_3d();
/// Column spans of a and b coincide.
bool same_span(const Mat<Rational>& a, const Mat<Rational>& b);

// ------------------------------------------------------------ instance data

/// Everything the identity checks read, for one representation f.
template <class S>
struct FormData {
  Mat<S> phi;
  Vec<S> xi;
  Mat<S> h;
  Mat<S> deta;
  Tensor4<S> r;
  BlockTensors<S> blocks;
  Coeffs<S> f;
  bool contact = false;
  bool sasakian = false;

  int dim() const { return static_cast<int>(xi.size()); }
  int n() const { return (dim() - 1) / 2; }
};

FormData<Expr> form_data(const AcmStructure& s, const Coeffs<Expr>& f, DEtaConvention convention);
/// The same data at a point, with pointwise coefficients.
FormData<Rational> evaluate(const FormData<Expr>& d, const Point& p, const Coeffs<Rational>& f);

/// Legs e_i with xi_i = 0, if they span the orthogonal complement of xi.
template <class S>
std::optional<std::vector<int>> legs_orthogonal_to_xi(const Vec<S>& xi);

// ------------------------------------------------------------- (kappa, mu)

template <class S>
struct KmValues {
  S kappa;
  S mu;
};

template <class S>
KmValues<S> km_of(const Coeffs<S>& f) {
  return {f[0] - f[2], f[3] - f[5]};
}

/// Components of R(X,Y)xi - kappa(eta(Y)X - eta(X)Y) - mu(eta(Y)hX - eta(X)hY).
template <class S>
std::vector<Residual> km_residuals(const FormData<S>& d, const S& kappa, const S& mu);

/// kappa = f1 - f3, mu = f4 - f6, checked against R(X,Y)xi. Throws
/// InternalInconsistency when the check fails.
KmValues<Expr> extract_km(const FormData<Expr>& d);

// -------------------------------------------------------------- sectional

template <class S>
struct Sectional {
  S direct;
  S formula;
};

/// K(X, phi X) for nonzero X orthogonal to xi (X need not be unit; the
/// direct value is normalized by |X|^4). Throws InvalidArgument otherwise.
template <class S>
Sectional<S> phi_sectional(const FormData<S>& d, const Vec<S>& x);
template <class S>
Sectional<S> xi_sectional(const FormData<S>& d, const Vec<S>& x);
template <class S>
Sectional<S> phi_x_xi_sectional(const FormData<S>& d, const Vec<S>& x);

/// Sectional formulas on every leg orthogonal to xi and on `random_vectors`
/// random unit vectors, plus independence of K(X, phi X) on contact data.
template <class S>
std::vector<CheckResult> sectional_suite(const FormData<S>& d, unsigned seed, int random_vectors = 10);

/// phi-conjugation identities, P-tensor identities, and on Sasakian data the
/// P~ lemma, over all leg tuples orthogonal to xi.
template <class S>
std::vector<CheckResult> identity_suite(const FormData<S>& d);

// ------------------------------------------------------------ Ricci, tau

/// Q(j,k) = S(e_j, e_k) = sum_i R(e_i, e_j, e_k, e_i).
template <class S>
Mat<S> ricci_trace(const Tensor4<S>& r);
/// (2n f1 + 3 f2 - f3) I - (3 f2 + f3 (2n-1)) xi xi^T + (f4 (2n-1) - f6) h.
template <class S>
Mat<S> ricci_formula(const FormData<S>& d);
/// (3 f1 + 3 f2 - 2 f3) / 3.
template <class S>
S tau_formula(const Coeffs<S>& f);
/// (K(X, phi X) + K(X, xi) + K(phi X, xi)) / 3 for the first leg X orthogonal to xi.
template <class S>
S tau_sectional(const FormData<S>& d);

/// Ricci formula, Q phi - phi Q, S(xi,xi) and (in 3-D) tau.
template <class S>
std::vector<CheckResult> ricci_suite(const FormData<S>& d);

/// (f1 + 3 f2) R1 + (3 f2 + f3) R3 + (f4 - f6) R4.
template <class S>
Tensor4<S> reconstruct_3d(const FormData<S>& d);

/// Factor t making R = g(Y,Z)QX - g(X,Z)QY + g(QY,Z)X - g(QX,Z)Y - t tau R1
/// hold with the sectional-average tau; nullopt when no single t works.
template <class S>
std::optional<S> three_d_tau_factor(const FormData<S>& d);

template <class S>
struct EtaEinstein {
  bool criterion = false;    ///< f4 (2n-1) - f6 = 0
  bool eta_einstein = false; ///< Q = a I + b eta (x) xi
  bool commutes = false;     ///< Q phi = phi Q
  bool km0_space = false;    ///< R(X,Y)xi = (f1-f3)(eta(Y)X - eta(X)Y)
  bool f4_eq_f6 = false;
  bool consistent() const;
};

template <class S>
EtaEinstein<S> eta_einstein_check(const FormData<S>& d);

/// Reconstruction, the 3-D curvature identity, the block kernel identities
/// and the eta-Einstein equivalences. Dimension 3 only.
template <class S>
std::vector<CheckResult> three_d_suite(const FormData<S>& d);

// ----------------------------------------------- constant (kappa, mu) data

/// Boeckx form of the curvature of a non-Sasakian (kappa, mu)-space.
Tensor4<Expr> boeckx_curvature(const FormData<Expr>& d, const Expr& kappa, const Expr& mu);

/// Eigen-distribution equations, the constant (kappa, mu) Ricci form and the
/// Boeckx form. Skipped unless kappa, mu are constant with kappa < 1.
std::vector<CheckResult> constant_km_suite(const FormData<Expr>& d);

/// kappa <= 1 at the point, with kappa = 1 forcing h = 0.
CheckResult kappa_bound(const FormData<Rational>& d);

}  // namespace kmsf
