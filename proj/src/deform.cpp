#include "kmsf/deform.hpp"

#include <algorithm>

#include "kmsf/errors.hpp"

namespace kmsf {

// ---------------------------------------------------------------- QuadSurd

namespace {

/// Largest k^2 dividing m, by trial division over small k.
mpz_class square_part(const mpz_class& m) {
  mpz_class out = 1, rest = m;
  for (unsigned long k = 2; k <= 100000; ++k) {
    const mpz_class k2 = mpz_class(k) * k;
    if (k2 > rest) break;
    while (rest % k2 == 0) {
      rest /= k2;
      out *= k2;
    }
  }
  return out;
}

}  // namespace

QuadSurd::QuadSurd(Rational p) : p_(std::move(p)) {}

QuadSurd::QuadSurd(Rational p, Rational q, const Rational& radicand) : p_(std::move(p)), q_(std::move(q)) {
  if (radicand.sign() < 0) throw DomainError("negative radicand " + radicand.str());
  if (q_.is_zero() || radicand.is_zero()) {
    q_ = 0;
    return;
  }
  // sqrt(n/d) = sqrt(n d)/d, then pull square factors out of n d.
  mpz_class m = radicand.num() * radicand.den();
  q_ /= Rational(radicand.den());
  const mpz_class sq = square_part(m);
  m /= sq;
  q_ *= *Rational(sq).sqrt();
  if (mpz_perfect_square_p(m.get_mpz_t())) {
    p_ += q_ * *Rational(m).sqrt();
    q_ = 0;
    return;
  }
  m_ = Rational(m);
}

QuadSurd QuadSurd::sqrt(const Rational& r) { return QuadSurd(0, 1, r); }

std::optional<Rational> QuadSurd::rational_value() const {
  if (!is_rational()) return std::nullopt;
  return p_;
}

int QuadSurd::sign() const {
  const int sp = p_.sign(), sq = q_.sign();
  if (sq == 0) return sp;
  if (sp == 0 || sp == sq) return sq;
  const auto c = p_ * p_ <=> q_ * q_ * m_;
  if (c == 0) return 0;
  return c > 0 ? sp : sq;
}

Expr QuadSurd::to_expr() const {
  if (is_rational()) return Expr(p_);
  return Expr(p_) + Expr(q_) * Expr::sqrt(Expr(m_));
}

Rational QuadSurd::common_radicand(const QuadSurd& a, const QuadSurd& b) {
  if (a.is_rational()) return b.m_;
  if (b.is_rational() || a.m_ == b.m_) return a.m_;
  if (!(a.m_ / b.m_).sqrt()) throw InvalidArgument("surds sqrt(" + a.m_.str() + ") and sqrt(" + b.m_.str() + ") do not share a field");
  return a.m_;
}

QuadSurd QuadSurd::over(const Rational& m) const {
  QuadSurd out = *this;
  if (is_rational() || m_ == m) return out;
  // q sqrt(m_) = q sqrt(m_/m) sqrt(m)
  out.q_ = q_ * *(m_ / m).sqrt();
  out.m_ = m;
  return out;
}

QuadSurd operator+(const QuadSurd& a, const QuadSurd& b) {
  const Rational m = QuadSurd::common_radicand(a, b);
  const QuadSurd x = a.over(m), y = b.over(m);
  return QuadSurd(x.p_ + y.p_, x.q_ + y.q_, m);
}

QuadSurd operator-(const QuadSurd& a) { return QuadSurd(-a.p_, -a.q_, a.m_); }
QuadSurd operator-(const QuadSurd& a, const QuadSurd& b) { return a + (-b); }

QuadSurd operator*(const QuadSurd& a, const QuadSurd& b) {
  const Rational m = QuadSurd::common_radicand(a, b);
  const QuadSurd x = a.over(m), y = b.over(m);
  return QuadSurd(x.p_ * y.p_ + x.q_ * y.q_ * m, x.p_ * y.q_ + x.q_ * y.p_, m);
}

QuadSurd operator/(const QuadSurd& a, const QuadSurd& b) {
  const Rational norm = b.p_ * b.p_ - b.q_ * b.q_ * b.m_;
  if (norm.is_zero()) throw DivisionByZero();
  const QuadSurd conj(b.p_ / norm, -b.q_ / norm, b.m_);
  return a * conj;
}

bool operator==(const QuadSurd& a, const QuadSurd& b) { return (a - b).sign() == 0; }

// -------------------------------------------------------------- parameters

KmParams KmParams::of(const Expr& kappa, const Expr& mu) {
  return {kappa, mu, Expr::sqrt(Expr(1) - kappa), std::nullopt, std::nullopt};
}

std::optional<KmValues<Expr>> read_km(const AcmStructure& s) {
  const auto legs = legs_orthogonal_to_xi(s.xi());
  if (!legs || legs->empty()) return std::nullopt;
  int x = 0;
  while (std::find(legs->begin(), legs->end(), x) != legs->end()) ++x;

  const auto& r = s.geometry().r;
  const Mat<Expr>& h = s.h();
  auto rxx = [&](int i, int j) { return r(i, x, x, j); };

  std::optional<KmValues<Expr>> km;
  const int i0 = legs->front();
  for (int i : *legs)
    for (int j : *legs)
      if (!km && i != j && !h(j, i).is_zero()) {
        const Expr mu = rxx(i, j) / h(j, i);
        km = KmValues<Expr>{rxx(i0, i0) - mu * h(i0, i0), mu};
      }
  for (int k : *legs)
    if (!km && h(k, k) != h(i0, i0)) {
      const Expr mu = (rxx(i0, i0) - rxx(k, k)) / (h(i0, i0) - h(k, k));
      km = KmValues<Expr>{rxx(i0, i0) - mu * h(i0, i0), mu};
    }
  if (!km) {
    if (!is_zero_matrix(h)) return std::nullopt;
    km = KmValues<Expr>{rxx(i0, i0), Expr(0)};
  }

  FormData<Expr> d;
  d.xi = s.xi();
  d.h = h;
  d.r = r;
  if (!km_residuals(d, km->kappa, km->mu).empty()) return std::nullopt;
  return km;
}

// ------------------------------------------------------------- deformation

namespace {

FramedChart rescale(const FramedChart& chart, const std::vector<Expr>& s) {
  const int n = chart.dim();
  if (chart.is_lie()) {
    StructureCoefficients c = chart.seeded_brackets();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (!c(i, j, k).is_zero()) c(i, j, k) = c(i, j, k) * s[i] * s[j] / s[k];
    return FramedChart::from_structure_constants(std::move(c));
  }
  Mat<Expr> frame = chart.frame();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!frame(i, j).is_zero()) frame(i, j) = frame(i, j) * s[i];
  return FramedChart::from_frame(chart.coordinates(), std::move(frame), chart.nonvanishing());
}

}  // namespace

DeformationResult d_homothetic(const KmValues<Expr>& km, const Rational& a) {
  if (a.sign() <= 0) throw InvalidArgument("deformation parameter a must be positive, got " + a.str());
  DeformationResult out;
  out.a = a;
  out.sqrt_a = a.sqrt();
  out.km = km;
  out.deformed = deform_km(km, Expr(a));
  return out;
}

DeformationResult d_homothetic(const AcmStructure& s, const Rational& a, DEtaConvention convention,
                               Rebuild rebuild) {
  if (a.sign() <= 0) throw InvalidArgument("deformation parameter a must be positive, got " + a.str());
  if (!s.is_contact_metric(convention)) throw InvalidArgument("D_a deformation needs a contact metric structure");
  const auto km = read_km(s);
  if (!km) throw InvalidArgument("structure is not a generalized (kappa, mu)-space");
  DeformationResult out = d_homothetic(*km, a);
  if (!out.sqrt_a && rebuild == Rebuild::WhenRational) return out;

  const auto legs = legs_orthogonal_to_xi(s.xi());
  if (!legs) throw InvalidArgument("xi must be a frame leg");
  const Expr root = out.sqrt_a ? Expr(*out.sqrt_a) : Expr::sqrt(Expr(a));
  std::vector<Expr> scale(s.dim(), Expr(1) / root);
  for (int i = 0; i < s.dim(); ++i)
    if (!s.xi()(i).is_zero()) scale[i] = Expr(1) / Expr(a);

  auto geo = std::make_shared<const FrameGeometry>(rescale(s.geometry().chart, scale));
  auto deformed = std::make_shared<const AcmStructure>(geo, s.phi(), s.xi());
  out.contact = deformed->contact_residuals(convention);
  FormData<Expr> d;
  d.xi = deformed->xi();
  d.h = deformed->h();
  d.r = geo->r;
  out.km_check = km_residuals(d, out.deformed.kappa, out.deformed.mu);
  out.structure = std::move(deformed);
  return out;
}

template <class S>
ChosenDeformation<S> choose_a(const S& kappa, const S& mu) {
  if (sign_of(kappa - S(1)) >= 0) throw InvalidArgument("choose_a needs kappa < 1");
  if (sign_of(mu - S(2)) == 0) throw InvalidArgument("choose_a needs mu != 2");
  const S a = (kappa - S(1)) / (mu - S(2));
  if (sign_of(a) <= 0) throw InvalidArgument("(kappa - 1)/(mu - 2) is not positive");
  const KmValues<S> bar = deform_km(KmValues<S>{kappa, mu}, a);
  if (!(bar.mu == bar.kappa + S(1))) throw InternalInconsistency("deformed mu is not kappa + 1");
  return {a, bar, -(bar.kappa + bar.mu)};
}

template ChosenDeformation<Rational> choose_a<Rational>(const Rational&, const Rational&);
template ChosenDeformation<QuadSurd> choose_a<QuadSurd>(const QuadSurd&, const QuadSurd&);

// ------------------------------------------------------------ construction

CsRoots solve_cs(const Rational& f6) {
  if (f6 <= Rational(-1)) throw InvalidArgument("f6 must exceed -1 (kappa = -f6 < 1), got " + f6.str());
  CsRoots out;
  if (f6 == Rational(3)) {
    out.roots = {QuadSurd(0)};
    return out;
  }
  const QuadSurd root = QuadSurd::sqrt(f6 + 1);
  const QuadSurd base(-5 - f6), den(3 - f6), four(4);
  out.roots = {(base + four * root) / den, (base - four * root) / den};
  return out;
}

bool Dim5System::ok() const {
  return std::all_of(residuals.begin(), residuals.end(), [](const Expr& e) { return e.is_zero(); });
}

Dim5System dim5_system(const Expr& f6) {
  if (auto v = f6.constant_value(); v && *v <= Rational(-1))
    throw InvalidArgument("f6 must exceed -1 (kappa = -f6 < 1), got " + v->str());
  Dim5System out;
  const Expr half(Rational(1, 2));
  out.f = {(f6 + 1) * half, (f6 - 1) * half, (3 * f6 + 1) * half, Expr(1), half, f6};
  const auto& [f1, f2, f3, f4, f5, f6v] = out.f;
  const Expr k = 1 - f1 + f3;
  const Expr root = Expr::sqrt(k);
  out.residuals = {
      f1 - f2 - f3 - f4 + f6v + f5 * k,
      f1 + f2 - f3 + f5 * k,
      2 * f2 + f4 - f6v,
      2 * f1 + 3 * f2 - f3 + f4 - f6v,
      f5 * k + 2 * (f4 - 1) * root + f1 + f4 - f6v - 2,
      f5 * k + 2 * (1 - f4) * root + f1 + f4 - f6v - 2,
  };
  out.kappa = f1 - f3;
  out.mu = f4 - f6v;
  out.c = f1 + 3 * f2;
  return out;
}

namespace {

CheckResult equal_check(std::string id, const std::vector<std::pair<std::string, Expr>>& diffs) {
  std::vector<Residual> res;
  for (const auto& [name, v] : diffs)
    if (!v.is_zero()) res.push_back({name, {}, v});
  return from_residuals(std::move(id), std::move(res));
}

}  // namespace

bool Construction::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status != Status::Fail; });
}

Construction construct(const Rational& f6) {
  Construction out;
  out.f6 = f6;
  out.cs = solve_cs(f6);
  out.c_s = out.cs.roots[out.cs.valid];
  const QuadSurd& cs = out.c_s;
  const QuadSurd quad = QuadSurd(3 - f6) * cs * cs + QuadSurd(10 + 2 * f6) * cs + QuadSurd(3 - f6);
  CheckResult root = equal_check("construct.c_s_root", {{"(3-f6)c^2 + (10+2f6)c + (3-f6)", quad.to_expr()}});
  if (root.status == Status::Pass && !((cs + QuadSurd(1)).sign() > 0 && !(cs == QuadSurd(1)))) {
    root.status = Status::Fail;
    root.detail = "c_s = " + cs.str() + " violates c_s > -1, c_s != 1";
  }
  if (root.detail.empty()) root.detail = "c_s = " + cs.str();
  out.checks.push_back(std::move(root));

  out.km = {cs * (QuadSurd(2) - cs), QuadSurd(-2) * cs};
  out.deformation = choose_a(out.km.kappa, out.km.mu);
  const auto& bar = out.deformation.deformed;
  out.checks.push_back(equal_check("construct.deformed_km",
                                   {{"kappa' + f6", (bar.kappa + QuadSurd(f6)).to_expr()},
                                    {"mu' - (1 - f6)", (bar.mu - QuadSurd(1 - f6)).to_expr()}}));
  out.checks.push_back(
      equal_check("construct.phi_sectional", {{"c' - (2 f6 - 1)", (out.deformation.c - QuadSurd(2 * f6 - 1)).to_expr()}}));

  out.system = dim5_system(Expr(f6));
  std::vector<std::pair<std::string, Expr>> sys;
  for (int i = 0; i < 6; ++i) sys.push_back({"equation " + std::to_string(i + 1), out.system.residuals[i]});
  sys.push_back({"kappa", out.system.kappa - bar.kappa.to_expr()});
  sys.push_back({"mu", out.system.mu - bar.mu.to_expr()});
  sys.push_back({"c", out.system.c - out.deformation.c.to_expr()});
  out.checks.push_back(equal_check("construct.dim5_system", sys));
  return out;
}

// ---------------------------------------------------------- classification

std::string to_string(Label l) {
  switch (l) {
    case Label::SU2_or_SO3: return "SU2_or_SO3";
    case Label::SL2R_or_O12: return "SL2R_or_O12";
    case Label::E2: return "E2";
    case Label::E11: return "E11";
    case Label::Unclassified: return "Unclassified";
  }
  return "?";
}

Classification classify_3d(const Rational& kappa, const Rational& mu, const Coeffs<Expr>* fit) {
  if (kappa > Rational(1)) throw InvalidArgument("kappa = " + kappa.str() + " exceeds 1");
  Classification out;
  out.lambda = QuadSurd::sqrt(1 - kappa);
  const QuadSurd base(1 - mu / 2);
  out.lower = base - out.lambda;
  out.upper = base + out.lambda;
  const int lo = out.lower.sign(), up = out.upper.sign();
  if (kappa == Rational(1))
    out.label = Label::Unclassified;
  else if (lo > 0 && up > 0)
    out.label = Label::SU2_or_SO3;
  else if (lo < 0 && up != 0)
    out.label = Label::SL2R_or_O12;
  else if (lo == 0 && mu < Rational(2))
    out.label = Label::E2;
  else if (up == 0 && mu > Rational(2))
    out.label = Label::E11;

  if (fit) {
    const auto& f = *fit;
    out.checks.push_back(equal_check("classify.constraint", {{"2f1 + 3f2 - f3 + f4 - f6", 2 * f[0] + 3 * f[1] - f[2] + f[3] - f[5]}}));
    out.checks.push_back(equal_check("classify.kappa", {{"f1 - f3 - kappa", f[0] - f[2] - Expr(kappa)}}));
    out.checks.push_back(equal_check("classify.mu", {{"f4 - f6 - mu", f[3] - f[5] - Expr(mu)},
                                                     {"-2f1 - 3f2 + f3 - mu", -2 * f[0] - 3 * f[1] + f[2] - Expr(mu)}}));
  }
  return out;
}

}  // namespace kmsf
