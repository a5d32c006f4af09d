#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "kmsf/errors.hpp"
#include "kmsf/frame.hpp"

using namespace kmsf;

namespace {

Expr P(const char* s) { return Expr::parse(s); }

FramedChart kt_chart() {
  Mat<Expr> e(3, 3);
  e << P("1"), P("0"), P("0"),
       P("-2*x2*x3"), P("2*x1/x3^3"), P("-1/x3^2"),
       P("0"), P("1/x3"), P("0");
  return FramedChart::from_frame({"x1", "x2", "x3"}, e, {P("x3")});
}

FramedChart epsilon_chart() {
  StructureCoefficients c(3);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    c(i, j, k) = Expr(2);
    c(j, i, k) = Expr(-2);
  }
  return FramedChart::from_structure_constants(c);
}

void expect_clean(const FrameGeometry& g) {
  CHECK(check_bracket_antisymmetry(g.c).empty());
  CHECK(check_jacobi(g.chart, g.c).empty());
  CHECK(check_metric_compatibility(g.gamma).empty());
  CHECK(check_torsion_free(g.gamma, g.c).empty());
  CHECK(check_curvature_symmetries(g.r).empty());
  CHECK(check_first_bianchi(g.r).empty());
}

}  // namespace

TEST_CASE("example chart brackets") {
  const auto c = brackets(kt_chart());
  CHECK(c(0, 1, 2) == P("2/x3^2"));
  CHECK(c(0, 1, 0).is_zero());
  CHECK(c(0, 1, 1).is_zero());
  CHECK(c(1, 2, 0) == Expr(2));
  CHECK(c(1, 2, 1).is_zero());
  CHECK(c(1, 2, 2) == P("1/x3^3"));
  for (int k = 0; k < 3; ++k) CHECK(c(2, 0, k).is_zero());
}

TEST_CASE("example chart connection table") {
  const auto g = koszul_connection(brackets(kt_chart()));
  // Written as g(i,j,k) for nabla_{e_i} e_j = sum_k g(i,j,k) e_k, zero-based legs.
  CHECK(g(0, 1, 2) == P("-1 + 1/x3^2"));
  CHECK(g(0, 2, 1) == P("1 - 1/x3^2"));
  CHECK(g(1, 2, 0) == P("1 + 1/x3^2"));
  CHECK(g(1, 0, 2) == P("-(1 + 1/x3^2)"));
  CHECK(g(2, 0, 1) == P("1 - 1/x3^2"));
  CHECK(g(2, 1, 0) == P("-1 + 1/x3^2"));
  CHECK(g(2, 1, 2) == P("-1/x3^3"));
  CHECK(g(2, 2, 1) == P("1/x3^3"));
  for (int k = 0; k < 3; ++k) CHECK(g(1, 1, k).is_zero());
}

TEST_CASE("example chart curvature list") {
  const FrameGeometry geo(kt_chart());
  const Expr kappa = P("(x3^4-1)/x3^4"), lambda = P("1/x3^2"), mu = P("2*(1-1/x3^2)");
  const auto& r = geo.r;
  CHECK(r(0, 1, 0, 1) == -(kappa + lambda * mu));
  CHECK(r(0, 1, 1, 0) == kappa + lambda * mu);
  CHECK(r(0, 2, 0, 2) == -kappa + lambda * mu);
  CHECK(r(0, 2, 2, 0) == kappa - lambda * mu);
  CHECK(r(1, 2, 1, 2) == kappa + mu - 2 * lambda.pow(3));
  CHECK(r(1, 2, 2, 1) == -(kappa + mu - 2 * lambda.pow(3)));
  for (int d = 0; d < 3; ++d) {
    CHECK(r(0, 1, 2, d).is_zero());
    CHECK(r(0, 2, 1, d).is_zero());
    CHECK(r(1, 2, 0, d).is_zero());
  }
  CHECK(r(0, 1, 0, 0).is_zero());
  CHECK(r(0, 1, 0, 2).is_zero());
  CHECK(sectional_curvature(r, 1, 2).eval({{"x3", Rational(1)}}) == Rational(2));
  CHECK(sectional_curvature(r, 0, 1).eval({{"x3", Rational(1)}}) == Rational(0));
  CHECK_THROWS_AS(sectional_curvature(r, 1, 1), InvalidArgument);
  expect_clean(geo);
}

TEST_CASE("coordinate frame is flat") {
  Mat<Expr> id = Mat<Expr>::Identity(3, 3);
  const FrameGeometry geo(FramedChart::from_frame({"x", "y", "z"}, id));
  CHECK(geo.c.flat().unaryExpr([](const Expr& e) { return e.is_zero(); }).all());
  CHECK(geo.r.is_zero());
}

TEST_CASE("constant orthogonal mix of a flat frame is flat") {
  Mat<Expr> q(3, 3);
  q << P("3/5"), P("4/5"), P("0"), P("-4/5"), P("3/5"), P("0"), P("0"), P("0"), P("1");
  const FrameGeometry geo(FramedChart::from_frame({"x", "y", "z"}, q));
  CHECK(geo.r.is_zero());
}

TEST_CASE("epsilon structure constants") {
  const FrameGeometry geo(epsilon_chart());
  expect_clean(geo);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        int eps = 0;
        if (i != j && j != k && i != k) eps = ((j - i + 3) % 3 == 1) ? 1 : -1;
        CHECK(geo.gamma(i, j, k) == Expr(eps));
      }
  // Round sphere of curvature 1.
  CHECK(sectional_curvature(geo.r, 0, 1) == Expr(1));
}

TEST_CASE("unknown coordinate and singular frame are rejected") {
  const auto ch = kt_chart();
  CHECK_THROWS_AS(ch.partial(P("x1"), "x9"), InvalidArgument);
  Mat<Expr> bad(2, 2);
  bad << P("x"), P("y"), P("2*x"), P("2*y");
  CHECK_THROWS_AS(FramedChart::from_frame({"x", "y"}, bad), DomainError);
  CHECK_THROWS_AS(ch.check_point({{"x1", 0}, {"x2", 0}, {"x3", 0}}), DomainError);
}

TEST_CASE("directional derivatives obey the Leibniz rule") {
  const auto ch = kt_chart();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> c(-3, 3);
  const char* atoms[] = {"x1", "x2", "x3", "1/x3", "x1*x2"};
  for (int t = 0; t < 20; ++t) {
    Expr f, g;
    for (const char* a : atoms) {
      f += c(rng) * P(a);
      g += c(rng) * P(a) * P(a);
    }
    for (int i = 0; i < 3; ++i) CHECK(ch.apply(i, f * g) == ch.apply(i, f) * g + f * ch.apply(i, g));
  }
}

TEST_CASE("20 random rational frames satisfy all frame identities") {
  std::mt19937_64 rng(20240601);
  for (int built = 0; built < 20; ++built) expect_clean(FrameGeometry(fixtures::random_frame(rng)));
}
