#pragma once

#include <algorithm>
#include <memory>
#include <random>
#include <utility>

#include "kmsf/acm.hpp"
#include "kmsf/frame.hpp"

// Charts built by hand, independent of the bundled manifests.
namespace fixtures {

using namespace kmsf;

inline Expr P(const char* s) { return Expr::parse(s); }

// Frame D * U * Q on (x1, x2, x3): D diagonal (rational constants, sometimes
// times a coordinate or its inverse), U unit upper triangular with linear
// entries, Q a signed permutation.
inline FramedChart random_frame(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(-3, 3), var(0, 2), coin(0, 3);
  const char* xs[] = {"x1", "x2", "x3"};
  Mat<Expr> d = Mat<Expr>::Zero(3, 3), u = Mat<Expr>::Identity(3, 3), q = Mat<Expr>::Zero(3, 3);
  std::vector<Expr> nonvanishing;
  for (int i = 0; i < 3; ++i) {
    int num = small(rng);
    if (num == 0) num = 2;
    d(i, i) = Expr(Rational(num, 1 + coin(rng)));
    if (coin(rng) == 0) {
      const Expr x = P(xs[var(rng)]);
      d(i, i) *= x.pow(small(rng) > 0 ? 1 : -1);
      nonvanishing.push_back(x);
    }
    for (int j = i + 1; j < 3; ++j) u(i, j) = Expr(small(rng)) + Expr(small(rng)) * P(xs[var(rng)]);
  }
  int perm[] = {0, 1, 2};
  std::shuffle(perm, perm + 3, rng);
  for (int i = 0; i < 3; ++i) q(i, perm[i]) = Expr(coin(rng) % 2 ? 1 : -1);
  return FramedChart::from_frame({"x1", "x2", "x3"}, d * u * q, nonvanishing);
}

inline FramedChart kt_chart() {
  Mat<Expr> e(3, 3);
  e << P("1"), P("0"), P("0"),
       P("-2*x2*x3"), P("2*x1/x3^3"), P("-1/x3^2"),
       P("0"), P("1/x3"), P("0");
  return FramedChart::from_frame({"x1", "x2", "x3"}, e, {P("x3")});
}

inline FramedChart epsilon_chart() {
  StructureCoefficients c(3);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    c(i, j, k) = Expr(2);
    c(j, i, k) = Expr(-2);
  }
  return FramedChart::from_structure_constants(c);
}

inline FramedChart flat_chart() {
  return FramedChart::from_frame({"x1", "x2", "x3"}, Mat<Expr>::Identity(3, 3));
}

// [e2,e3] = 2 e1, [e3,e1] = c2 e2, [e1,e2] = c3 e3 (one-based legs).
inline FramedChart lie3_chart(const Expr& c2, const Expr& c3) {
  StructureCoefficients c(3);
  c(1, 2, 0) = Expr(2);
  c(2, 1, 0) = Expr(-2);
  c(2, 0, 1) = c2;
  c(0, 2, 1) = -c2;
  c(0, 1, 2) = c3;
  c(1, 0, 2) = -c3;
  return FramedChart::from_structure_constants(c);
}

// xi = e1, phi e1 = 0, phi e2 = e3, phi e3 = -e2.
inline AcmStructure standard_structure(FramedChart chart) {
  Mat<Expr> phi = Mat<Expr>::Constant(3, 3, Expr(0));
  phi(2, 1) = Expr(1);
  phi(1, 2) = Expr(-1);
  return AcmStructure(std::make_shared<const FrameGeometry>(std::move(chart)), phi, unit(3, 0));
}

// Unit tangent bundle of flat R^3 with the sphere in stereographic
// coordinates (u, v); legs are scaled by `perp` and xi by `along`, so
// (perp, along) = (1/sqrt(a), 1/a) is the D_a-deformed frame.
inline FramedChart sphere_bundle_chart(const Expr& perp = Expr(1), const Expr& along = Expr(1)) {
  const Expr r2 = P("1 + u^2 + v^2");
  const Expr s[3] = {P("2*u") / r2, P("2*v") / r2, P("u^2 + v^2 - 1") / r2};
  Mat<Expr> e = Mat<Expr>::Constant(5, 5, Expr(0));
  for (int i = 0; i < 3; ++i) {
    e(0, i) = 2 * along * s[i];
    e(1, i) = perp * r2 * s[i].diff("u");
    e(2, i) = perp * r2 * s[i].diff("v");
  }
  e(3, 3) = perp * r2;
  e(4, 4) = perp * r2;
  return FramedChart::from_frame({"x1", "x2", "x3", "u", "v"}, e);
}

// [X1,Y1] = [X2,Y2] = 2 xi on legs (xi, X1, X2, Y1, Y2).
inline FramedChart heisenberg5_chart() {
  StructureCoefficients c(5);
  for (auto [x, y] : {std::pair{1, 3}, std::pair{2, 4}}) {
    c(x, y, 0) = Expr(2);
    c(y, x, 0) = Expr(-2);
  }
  return FramedChart::from_structure_constants(c);
}

// xi = e0, phi e1 = e3, phi e2 = e4.
inline AcmStructure structure5(FramedChart chart) {
  Mat<Expr> phi = Mat<Expr>::Constant(5, 5, Expr(0));
  phi(3, 1) = Expr(1);
  phi(1, 3) = Expr(-1);
  phi(4, 2) = Expr(1);
  phi(2, 4) = Expr(-1);
  return AcmStructure(std::make_shared<const FrameGeometry>(std::move(chart)), phi, unit(5, 0));
}

}  // namespace fixtures
