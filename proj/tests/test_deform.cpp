#include <doctest.h>

#include "fixtures.hpp"
#include "kmsf/deform.hpp"
#include "kmsf/errors.hpp"

using namespace kmsf;
using fixtures::P;

namespace {

Rational R(const char* s) { return Rational::parse(s); }

QuadSurd surd(long p, long q, long m) { return QuadSurd(Rational(p), Rational(q), Rational(m)); }

KmValues<Rational> km_at(const KmValues<Expr>& km) {
  return {*km.kappa.constant_value(), *km.mu.constant_value()};
}

const Rational grid[] = {R("-3"), R("-1/2"), R("0"), R("1/3"), R("3/4")};
const Rational scales[] = {R("1/4"), R("1/2"), R("1"), R("2"), R("9")};

}  // namespace

TEST_CASE("quadratic surds") {
  CHECK(QuadSurd::sqrt(8) == surd(0, 2, 2));
  CHECK(QuadSurd::sqrt(R("9/4")).rational_value() == R("3/2"));
  CHECK(QuadSurd::sqrt(R("1/2")) * QuadSurd::sqrt(2) == QuadSurd(1));
  CHECK(QuadSurd::sqrt(R("1/2")).str() == P("sqrt(2)/2").str());
  CHECK((surd(1, 1, 2) / surd(1, -1, 2)) == surd(-3, -2, 2));
  CHECK(surd(3, -2, 2).sign() == 1);  // 3 > sqrt(8)
  CHECK(surd(-3, 2, 2).sign() == -1);
  CHECK(surd(1, -1, 2).sign() == -1);
  CHECK(surd(-1, 1, 3).sign() == 1);
  CHECK((surd(2, 1, 3) - surd(2, 1, 3)).sign() == 0);
  CHECK_THROWS_AS(QuadSurd::sqrt(-1), DomainError);
  CHECK_THROWS_AS(QuadSurd::sqrt(2) + QuadSurd::sqrt(3), InvalidArgument);
  CHECK_THROWS_AS(QuadSurd(1) / QuadSurd(0), DivisionByZero);
}

TEST_CASE("km parameters") {
  const auto p = KmParams::of(P("(x3^4 - 1)/x3^4"), P("2*(1 - 1/x3^2)"));
  CHECK(p.lambda == P("1/x3^2"));
  CHECK(p.lambda * p.lambda + p.kappa == Expr(1));
  CHECK_THROWS_AS(KmParams::of(Expr(2), Expr(0)), DomainError);
}

TEST_CASE("deformation closed forms") {
  for (const auto& k : grid)
    for (const auto& m : grid) {
      const KmValues<Rational> km{k, m};
      const auto id = deform_km(km, Rational(1));
      CHECK(id.kappa == k);
      CHECK(id.mu == m);
      for (const auto& a : scales) {
        const auto back = deform_km(deform_km(km, a), 1 / a);
        CHECK(back.kappa == k);
        CHECK(back.mu == m);
        for (const auto& b : scales) {
          const auto twice = deform_km(deform_km(km, a), b);
          const auto once = deform_km(km, a * b);
          CHECK(twice.kappa == once.kappa);
          CHECK(twice.mu == once.mu);
        }
      }
    }
  const auto d = deform_km(KmValues<Rational>{0, 0}, R("1/2"));
  CHECK(d.kappa == -3);
  CHECK(d.mu == -2);
  CHECK_THROWS_AS(d_homothetic(KmValues<Expr>{0, 0}, Rational(0)), InvalidArgument);
  CHECK_THROWS_AS(d_homothetic(KmValues<Expr>{0, 0}, Rational(-1)), InvalidArgument);
}

TEST_CASE("choose_a") {
  auto c = choose_a(Rational(0), Rational(0));
  CHECK(c.a == R("1/2"));
  CHECK(c.deformed.kappa == -3);
  CHECK(c.deformed.mu == -2);
  CHECK(c.c == 5);

  // c_s = 3: kappa = c_s(2 - c_s), mu = -2 c_s
  c = choose_a(Rational(-3), Rational(-6));
  CHECK(c.a == R("1/2"));
  CHECK(c.deformed.kappa == -15);
  CHECK(c.deformed.mu == -14);

  for (const auto& k : grid)
    for (const auto& m : grid) {
      const auto x = choose_a(k, m);
      CHECK(x.deformed.mu == x.deformed.kappa + 1);
      CHECK(x.deformed.mu != 2);
    }
  CHECK_THROWS_AS(choose_a(Rational(0), Rational(2)), InvalidArgument);
  CHECK_THROWS_AS(choose_a(Rational(1), Rational(0)), InvalidArgument);
  CHECK_THROWS_AS(choose_a(Rational(0), Rational(3)), InvalidArgument);
}

TEST_CASE("c_s quadratic") {
  auto r = solve_cs(3);
  REQUIRE(r.roots.size() == 1);
  CHECK(r.roots[0] == QuadSurd(0));

  r = solve_cs(0);
  REQUIRE(r.roots.size() == 2);
  CHECK(r.roots[r.valid].rational_value() == R("-1/3"));
  CHECK(r.roots[1 - r.valid].rational_value() == R("-3"));

  r = solve_cs(8);
  CHECK(r.roots[r.valid].rational_value() == R("1/5"));
  CHECK(r.roots[1 - r.valid].rational_value() == R("5"));

  for (const char* f : {"-1/2", "1/2", "2", "7"}) {
    const Rational f6 = R(f);
    for (const auto& c : solve_cs(f6).roots) {
      const QuadSurd q = QuadSurd(3 - f6) * c * c + QuadSurd(10 + 2 * f6) * c + QuadSurd(3 - f6);
      CHECK(q.sign() == 0);
    }
  }
  CHECK_THROWS_AS(solve_cs(-1), InvalidArgument);
  CHECK_THROWS_AS(solve_cs(-2), InvalidArgument);
}

TEST_CASE("rigidity system") {
  auto s = dim5_system(Expr(1));
  const Coeffs<Expr> one{Expr(1), Expr(0), Expr(2), Expr(1), Expr(Rational(1, 2)), Expr(1)};
  CHECK(s.f == one);
  CHECK(s.ok());
  CHECK(s.kappa == Expr(-1));
  CHECK(s.mu == Expr(0));
  CHECK(s.c == Expr(1));

  s = dim5_system(Expr(3));
  const Coeffs<Expr> three{Expr(2), Expr(1), Expr(5), Expr(1), Expr(Rational(1, 2)), Expr(3)};
  CHECK(s.f == three);
  CHECK(s.c == Expr(5));

  s = dim5_system(Expr::symbol("f6"));
  CHECK(s.ok());
  CHECK(s.kappa == P("-f6"));
  CHECK(s.mu == P("1 - f6"));
  CHECK(s.c == P("2*f6 - 1"));
  CHECK(s.f[0] + 3 * s.f[1] == s.c);

  CHECK_THROWS_AS(dim5_system(Expr(-1)), InvalidArgument);
}

TEST_CASE("construction pipeline") {
  for (const char* f : {"-1/2", "0", "1", "3", "8", "15"}) {
    const Rational f6 = R(f);
    const auto c = construct(f6);
    INFO("f6 = " << f);
    CHECK(c.ok());
    CHECK((c.c_s + QuadSurd(1)).sign() > 0);
    CHECK(!(c.c_s == QuadSurd(1)));
    CHECK(c.deformation.deformed.kappa == QuadSurd(-f6));
    CHECK(c.deformation.deformed.mu == QuadSurd(1 - f6));
    CHECK(c.deformation.c == QuadSurd(2 * f6 - 1));
  }
  const auto c3 = construct(3);
  CHECK(c3.c_s == QuadSurd(0));
  CHECK(c3.deformation.a == QuadSurd(R("1/2")));
  const auto c0 = construct(0);
  CHECK(c0.c_s.rational_value() == R("-1/3"));
  CHECK(c0.deformation.c == QuadSurd(-1));
  const auto half = construct(R("-1/2"));
  CHECK(!half.c_s.is_rational());
  CHECK_THROWS_AS(construct(-1), InvalidArgument);
}

TEST_CASE("classification labels") {
  CHECK(classify_3d(R("3/4"), 0).label == Label::SU2_or_SO3);
  CHECK(classify_3d(0, 0).label == Label::E2);
  CHECK(classify_3d(-3, -2).label == Label::E2);
  CHECK(classify_3d(0, 4).label == Label::E11);
  CHECK(classify_3d(0, 1).label == Label::SL2R_or_O12);
  CHECK(classify_3d(-8, 20).label == Label::SL2R_or_O12);  // both tests negative
  // lambda = sqrt(2): 3/2 - sqrt(2) > 0 but 1 - sqrt(2) < 0
  CHECK(classify_3d(-1, -1).label == Label::SU2_or_SO3);
  CHECK(classify_3d(-1, 0).label == Label::SL2R_or_O12);
  CHECK(classify_3d(1, 0).label == Label::Unclassified);
  CHECK(classify_3d(1, 2).label == Label::Unclassified);
  CHECK_THROWS_AS(classify_3d(2, 0), InvalidArgument);
}

TEST_CASE("classification against unimodular Lie algebra signs") {
  // [e2,e3] = 2e1, [e3,e1] = c2 e2, [e1,e2] = c3 e3: the group is fixed by the
  // signs of (2, c2, c3) up to order and overall sign.
  auto expected = [](int c2, int c3) {
    const int pos = 1 + (c2 > 0) + (c3 > 0), neg = (c2 < 0) + (c3 < 0), zero = (c2 == 0) + (c3 == 0);
    if (zero == 0) return (neg == 0 || pos == 0) ? Label::SU2_or_SO3 : Label::SL2R_or_O12;
    if (zero == 1) return neg == 0 ? Label::E2 : Label::E11;
    return Label::Unclassified;
  };
  int seen[5] = {};
  for (int c2 = -3; c2 <= 3; ++c2)
    for (int c3 = -3; c3 <= 3; ++c3) {
      if (c2 == c3 || (c2 == 0 && c3 == 0)) continue;
      const auto s = fixtures::standard_structure(fixtures::lie3_chart(Expr(c2), Expr(c3)));
      const auto km = read_km(s);
      REQUIRE(km);
      const auto v = km_at(*km);
      const auto fit = fit_coefficients(s.geometry(), build_blocks(s), {Point{}}, Gauge::ThreeDReduced);
      REQUIRE(fit.ok());
      Coeffs<Expr> f;
      for (int i = 0; i < 6; ++i) f[i] = Expr(fit.points[0].f[i]);
      const auto c = classify_3d(v.kappa, v.mu, &f);
      INFO("c2 = " << c2 << ", c3 = " << c3);
      CHECK(c.label == expected(c2, c3));
      REQUIRE(c.checks.size() == 3);
      for (const auto& chk : c.checks) CHECK(chk.status == Status::Pass);
      ++seen[static_cast<int>(c.label)];
    }
  for (int l = 0; l < 4; ++l) CHECK(seen[l] > 0);
}

TEST_CASE("reading kappa and mu from curvature") {
  const auto kt = fixtures::standard_structure(fixtures::kt_chart());
  const auto km = read_km(kt);
  REQUIRE(km);
  CHECK(km->kappa == P("(x3^4 - 1)/x3^4"));
  CHECK(km->mu == P("2*(1 - 1/x3^2)"));

  const auto round = read_km(fixtures::standard_structure(fixtures::epsilon_chart()));
  REQUIRE(round);
  CHECK(round->kappa == Expr(1));

  const auto bundle = read_km(fixtures::structure5(fixtures::sphere_bundle_chart()));
  REQUIRE(bundle);
  CHECK(bundle->kappa == Expr(0));
  CHECK(bundle->mu == Expr(0));
}

TEST_CASE("tensor-level deformation of the 3-D example") {
  const auto kt = fixtures::standard_structure(fixtures::kt_chart());
  const Expr kappa = P("(x3^4 - 1)/x3^4");

  auto d = d_homothetic(kt, 4);
  REQUIRE(d.tensor_level());
  CHECK(d.sqrt_a == Rational(2));
  CHECK(d.ok());
  CHECK(d.deformed.kappa == (kappa + 15) / 16);
  CHECK(d.deformed.mu == P("(2*(1 - 1/x3^2) + 6)/4"));
  const auto recomputed = read_km(*d.structure);
  REQUIRE(recomputed);
  CHECK(recomputed->kappa == d.deformed.kappa);
  // deformed h = h/a
  CHECK(d.structure->h() == Mat<Expr>(kt.h() / Expr(4)));

  const auto back = d_homothetic(*d.structure, R("1/4"));
  REQUIRE(back.tensor_level());
  CHECK(back.ok());
  CHECK(back.deformed.kappa == kappa);

  d = d_homothetic(kt, 1);
  CHECK(d.ok());
  CHECK(d.deformed.kappa == kappa);

  d = d_homothetic(kt, 2);
  CHECK(!d.tensor_level());
  CHECK(!d.sqrt_a);
  CHECK(d.deformed.kappa == (kappa + 3) / 4);

  d = d_homothetic(kt, 2, DEtaConvention::Half, Rebuild::Always);
  REQUIRE(d.tensor_level());
  CHECK(d.ok());

  CHECK_THROWS_AS(d_homothetic(fixtures::standard_structure(fixtures::flat_chart()), 2), InvalidArgument);
  CHECK_THROWS_AS(d_homothetic(kt, 0), InvalidArgument);
}

TEST_CASE("tensor-level deformation of Lie charts") {
  const auto s = fixtures::standard_structure(fixtures::lie3_chart(Expr(3), Expr(-1)));
  const auto d = d_homothetic(s, R("9/4"));
  REQUIRE(d.tensor_level());
  CHECK(d.ok());
  CHECK(d.structure->geometry().chart.is_lie());
}

TEST_CASE("5-D deformation lands on the rigidity solution") {
  const auto bundle = fixtures::structure5(fixtures::sphere_bundle_chart());
  REQUIRE(bundle.is_contact_metric(DEtaConvention::Half));

  auto d = d_homothetic(bundle, R("1/4"));
  REQUIRE(d.tensor_level());
  CHECK(d.ok());
  CHECK(d.deformed.kappa == Expr(-15));
  CHECK(d.deformed.mu == Expr(-6));

  // a = 1/2 turns the (0,0)-space into the f6 = 3 space form.
  d = d_homothetic(bundle, R("1/2"), DEtaConvention::Half, Rebuild::Always);
  REQUIRE(d.tensor_level());
  CHECK(d.ok());
  CHECK(d.deformed.kappa == Expr(-3));
  CHECK(d.deformed.mu == Expr(-2));
  CHECK(classify_3d(-3, -2).label == Label::E2);

  const auto& s = *d.structure;
  const auto fit = fit_coefficients(s.geometry(), build_blocks(s),
                                    {Point{{"u", 0}, {"v", 0}}, Point{{"u", 1}, {"v", 2}}, Point{{"u", R("-1/3")}, {"v", 5}}},
                                    Gauge::None);
  REQUIRE(fit.ok());
  const auto sys = dim5_system(Expr(3));
  for (const auto& p : fit.points) {
    CHECK(p.kernel.cols() == 0);
    for (int i = 0; i < 6; ++i) CHECK(Expr(p.f[i]) == sys.f[i]);
  }
  CHECK(ansatz_residuals(s.geometry().r, build_blocks(s), sys.f).empty());

  // The undeformed bundle is a (0,0)-space but not a space form.
  const auto nofit = fit_coefficients(bundle.geometry(), build_blocks(bundle), {Point{{"u", 1}, {"v", 2}}}, Gauge::None);
  CHECK(nofit.points[0].state == PointFit::State::NoFit);
}
