#include "kmsf/spaceform.hpp"

#include <atomic>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "kmsf/errors.hpp"

namespace kmsf {

namespace {

template <class S>
Vec<S> leg(int n, int i) {
  Vec<S> v = Vec<S>::Constant(n, S(0));
  v(i) = S(1);
  return v;
}

template <class S>
S inner(const Vec<S>& x, const Vec<S>& y) {
  S out(0);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!is_zero(x(i)) && !is_zero(y(i))) out = out + x(i) * y(i);
  return out;
}

template <class S>
bool all_zero(const Vec<S>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!is_zero(v(i))) return false;
  return true;
}

inline Expr as_expr(const Expr& e) { return e; }
inline Expr as_expr(const Rational& r) { return Expr(r); }

template <class S>
void record(std::vector<Residual>& out, const std::string& name, std::vector<int> idx, const S& v) {
  if (!is_zero(v)) out.push_back({name, std::move(idx), as_expr(v)});
}

template <class S>
void record_tensor(std::vector<Residual>& out, const std::string& name, const Tensor4<S>& t) {
  const int n = t.dim();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) record(out, name, {a, b, c, d}, t(a, b, c, d));
}

template <class S>
void record_matrix(std::vector<Residual>& out, const std::string& name, const Mat<S>& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) record(out, name, {i, j}, m(i, j));
}

/// Vector R(X,Y)Z.
template <class S>
Vec<S> apply_r(const Tensor4<S>& r, const Vec<S>& x, const Vec<S>& y, const Vec<S>& z) {
  const int n = r.dim();
  Vec<S> out(n);
  for (int d = 0; d < n; ++d) out(d) = contract(r, x, y, z, leg<S>(n, d));
  return out;
}

template <class S>
std::string str(const S& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

// ------------------------------------------------------------- blocks

template <class S>
BlockTensors<S> build_blocks(const Mat<S>& phi, const Vec<S>& xi, const Mat<S>& h) {
  const int n = static_cast<int>(xi.size());
  const Mat<S> ph = phi * h;
  auto delta = [](int i, int j) { return i == j ? S(1) : S(0); };
  BlockTensors<S> out;
  for (auto& t : out.r) t = Tensor4<S>(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          out.r[0](a, b, c, d) = delta(b, c) * delta(a, d) - delta(a, c) * delta(b, d);
          out.r[1](a, b, c, d) =
              phi(a, c) * phi(d, b) - phi(b, c) * phi(d, a) + S(2) * phi(a, b) * phi(d, c);
          out.r[2](a, b, c, d) = xi(a) * xi(c) * delta(b, d) - xi(b) * xi(c) * delta(a, d) +
                                 delta(a, c) * xi(b) * xi(d) - delta(b, c) * xi(a) * xi(d);
          out.r[3](a, b, c, d) = delta(b, c) * h(d, a) - delta(a, c) * h(d, b) + h(c, b) * delta(a, d) -
                                 h(c, a) * delta(b, d);
          out.r[4](a, b, c, d) = h(c, b) * h(d, a) - h(c, a) * h(d, b) + ph(c, a) * ph(d, b) - ph(c, b) * ph(d, a);
          out.r[5](a, b, c, d) = xi(a) * xi(c) * h(d, b) - xi(b) * xi(c) * h(d, a) + h(c, a) * xi(b) * xi(d) -
                                 h(c, b) * xi(a) * xi(d);
        }
  return out;
}

BlockTensors<Expr> build_blocks(const AcmStructure& s) { return build_blocks<Expr>(s.phi(), s.xi(), s.h()); }

template <class S>
Tensor4<S> combine(const BlockTensors<S>& blocks, const Coeffs<S>& f) {
  Tensor4<S> out(blocks[0].dim());
  for (int i = 0; i < 6; ++i)
    if (!is_zero(f[i])) out += f[i] * blocks[i];
  return out;
}

template <class S>
S contract(const Tensor4<S>& t, const Vec<S>& x, const Vec<S>& y, const Vec<S>& z, const Vec<S>& w) {
  const int n = t.dim();
  S out(0);
  for (int a = 0; a < n; ++a) {
    if (is_zero(x(a))) continue;
    for (int b = 0; b < n; ++b) {
      if (is_zero(y(b))) continue;
      const S xy = x(a) * y(b);
      for (int c = 0; c < n; ++c) {
        if (is_zero(z(c))) continue;
        for (int d = 0; d < n; ++d) {
          if (is_zero(w(d)) || is_zero(t(a, b, c, d))) continue;
          out = out + xy * z(c) * w(d) * t(a, b, c, d);
        }
      }
    }
  }
  return out;
}

template <class S>
Tensor4<S> p_tensor(const Mat<S>& f) {
  const int n = static_cast<int>(f.rows());
  auto g = [](int i, int j) { return i == j ? S(1) : S(0); };
  Tensor4<S> p(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          p(a, b, c, d) = f(a, c) * g(b, d) - f(a, d) * g(b, c) - f(b, c) * g(a, d) + f(b, d) * g(a, c);
  return p;
}

// ------------------------------------------------------------- fitting

std::string to_string(Gauge g) { return g == Gauge::None ? "none" : "three_d_reduced"; }

Gauge parse_gauge(const std::string& s) {
  if (s == "none") return Gauge::None;
  if (s == "three_d_reduced") return Gauge::ThreeDReduced;
  throw InvalidArgument("unknown gauge '" + s + "' (expected none or three_d_reduced)");
}

bool SpaceFormFit::ok() const {
  for (const auto& p : points)
    if (!p.ok()) return false;
  return !points.empty();
}

void SpaceFormFit::require() const {
  if (points.empty()) throw NoFit("no sample points");
  for (const auto& p : points) {
    if (p.state == PointFit::State::NoFit) throw NoFit(p.message);
    if (p.state == PointFit::State::DomainError) throw DomainError(p.message);
    if (p.state == PointFit::State::Irrational) throw IrrationalAtPoint(p.message);
  }
}

namespace {

std::string point_str(const Point& p) {
  std::string s = "{";
  for (const auto& [k, v] : p) s += (s.size() > 1 ? ", " : "") + k + "=" + v.str();
  return s + "}";
}

PointFit fit_at(const FrameGeometry& geo, const BlockTensors<Expr>& blocks, const Point& p, Gauge gauge) {
  PointFit out;
  out.point = p;
  Tensor4<Rational> r;
  std::array<Tensor4<Rational>, 6> b;
  try {
    geo.chart.check_point(p);
    r = eval(geo.r, p);
    for (int i = 0; i < 6; ++i) b[i] = eval(blocks[i], p);
  } catch (const IrrationalAtPoint& e) {
    out.state = PointFit::State::Irrational;
    out.message = point_str(p) + ": " + e.what();
    return out;
  } catch (const DomainError& e) {
    out.state = PointFit::State::DomainError;
    out.message = point_str(p) + ": " + e.what();
    return out;
  }

  const Eigen::Index rows = r.flat().size();
  Mat<Rational> a(rows, 6);
  for (int i = 0; i < 6; ++i) a.col(i) = b[i].flat();
  const Vec<Rational> rhs = r.flat();
  out.kernel = nullspace<Rational>(a);

  const std::vector<int> cols = gauge == Gauge::ThreeDReduced ? std::vector<int>{0, 2, 3} : std::vector<int>{0, 1, 2, 3, 4, 5};
  Mat<Rational> sub(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sub.col(j) = a.col(cols[j]);

  int bad = -1;
  const auto x = solve<Rational>(sub, rhs, &bad);
  if (!x) {
    out.state = PointFit::State::NoFit;
    const int n = r.dim();
    if (bad >= 0) out.inconsistent = {bad / (n * n * n), (bad / (n * n)) % n, (bad / n) % n, bad % n};
    std::ostringstream os;
    os << point_str(p) << ": curvature is not a combination of "
       << (gauge == Gauge::ThreeDReduced ? "R1, R3, R4" : "R1..R6");
    if (bad >= 0) {
      os << " (component R(" << out.inconsistent[0] + 1 << "," << out.inconsistent[1] + 1 << ","
         << out.inconsistent[2] + 1 << "," << out.inconsistent[3] + 1 << "))";
    }
    out.message = os.str();
    return out;
  }
  out.f.fill(Rational(0));
  for (std::size_t j = 0; j < cols.size(); ++j) out.f[cols[j]] = (*x)(static_cast<Eigen::Index>(j));

  // Reconstruction must be exact.
  Vec<Rational> check = -rhs;
  for (int i = 0; i < 6; ++i)
    if (!out.f[i].is_zero()) check += out.f[i] * a.col(i);
  if (!is_zero_matrix<Rational>(check)) throw InternalInconsistency("fit reconstruction residual at " + point_str(p));
  return out;
}

}  // namespace

SpaceFormFit fit_coefficients(const FrameGeometry& geo, const BlockTensors<Expr>& blocks,
                              const std::vector<Point>& points, Gauge gauge, int jobs) {
  if (points.empty()) throw InvalidArgument("fit needs at least one sample point");
  if (gauge == Gauge::ThreeDReduced && geo.dim() != 3) throw InvalidArgument("three_d_reduced gauge needs dimension 3");
  SpaceFormFit out;
  out.gauge = gauge;
  out.points.resize(points.size());
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) out.points[i] = fit_at(geo, blocks, points[i], gauge);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

std::vector<Residual> ansatz_residuals(const CurvatureTensor& r, const BlockTensors<Expr>& blocks,
                                       const Coeffs<Expr>& f) {
  std::vector<Residual> out;
  record_tensor(out, "sum f_i R_i = R", combine(blocks, f) - r);
  return out;
}

Mat<Rational> gauge_directions_3d() {
  Mat<Rational> k = Mat<Rational>::Constant(6, 3, Rational(0));
  k(0, 0) = Rational(-1);
  k(1, 0) = Rational(1, 3);
  k(2, 0) = Rational(-1);
  k(3, 1) = Rational(1);
  k(5, 1) = Rational(1);
  k(4, 2) = Rational(1);
  return k;
}

bool same_span(const Mat<Rational>& a, const Mat<Rational>& b) {
  if (a.rows() != b.rows()) return false;
  Mat<Rational> both(a.rows(), a.cols() + b.cols());
  both << a, b;
  const int r = rank<Rational>(both);
  return r == rank<Rational>(a) && r == rank<Rational>(b);
}

// ------------------------------------------------------- instance data

FormData<Expr> form_data(const AcmStructure& s, const Coeffs<Expr>& f, DEtaConvention convention) {
  FormData<Expr> d;
  d.phi = s.phi();
  d.xi = s.xi();
  d.h = s.h();
  d.deta = s.d_eta(convention);
  d.r = s.geometry().r;
  d.blocks = build_blocks(s);
  d.f = f;
  d.contact = s.is_contact_metric(convention);
  d.sasakian = s.is_sasakian();
  return d;
}

FormData<Rational> evaluate(const FormData<Expr>& d, const Point& p, const Coeffs<Rational>& f) {
  FormData<Rational> out;
  out.phi = eval(d.phi, p);
  out.xi = eval(Mat<Expr>(d.xi), p);
  out.h = eval(d.h, p);
  out.deta = eval(d.deta, p);
  out.r = eval(d.r, p);
  for (int i = 0; i < 6; ++i) out.blocks.r[i] = eval(d.blocks[i], p);
  out.f = f;
  out.contact = d.contact;
  out.sasakian = d.sasakian;
  return out;
}

template <class S>
std::optional<std::vector<int>> legs_orthogonal_to_xi(const Vec<S>& xi) {
  std::vector<int> legs;
  for (int i = 0; i < xi.size(); ++i)
    if (is_zero(xi(i))) legs.push_back(i);
  if (static_cast<Eigen::Index>(legs.size()) != xi.size() - 1) return std::nullopt;
  return legs;
}

// --------------------------------------------------------- (kappa, mu)

template <class S>
std::vector<Residual> km_residuals(const FormData<S>& d, const S& kappa, const S& mu) {
  const int n = d.dim();
  std::vector<Residual> out;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int e = 0; e < n; ++e) {
        S v(0);
        for (int c = 0; c < n; ++c)
          if (!is_zero(d.xi(c))) v = v + d.r(a, b, c, e) * d.xi(c);
        const S dae = a == e ? S(1) : S(0), dbe = b == e ? S(1) : S(0);
        v = v - kappa * (d.xi(b) * dae - d.xi(a) * dbe) - mu * (d.xi(b) * d.h(e, a) - d.xi(a) * d.h(e, b));
        record(out, "R(X,Y)xi = kappa(eta(Y)X - eta(X)Y) + mu(eta(Y)hX - eta(X)hY)", {a, b, e}, v);
      }
  return out;
}

KmValues<Expr> extract_km(const FormData<Expr>& d) {
  const auto km = km_of(d.f);
  const auto res = km_residuals(d, km.kappa, km.mu);
  if (!res.empty()) {
    throw InternalInconsistency("R(X,Y)xi does not match kappa = " + km.kappa.str() + ", mu = " + km.mu.str() +
                                " (first residual " + res.front().value.str() + ")");
  }
  return km;
}

// ---------------------------------------------------------- sectional

namespace {

template <class S>
S norm2_checked(const FormData<S>& d, const Vec<S>& x) {
  if (!is_zero(inner(x, d.xi))) throw InvalidArgument("vector is not orthogonal to xi");
  const S n2 = inner(x, x);
  if (is_zero(n2)) throw InvalidArgument("zero vector");
  return n2;
}

}  // namespace

template <class S>
Sectional<S> phi_sectional(const FormData<S>& d, const Vec<S>& x) {
  const S n2 = norm2_checked(d, x);
  const Vec<S> px = d.phi * x;
  const auto& f = d.f;
  const Vec<S> hx = d.h * x - d.phi * (d.h * px);
  return {contract(d.r, x, px, px, x) / (n2 * n2), f[0] + S(3) * f[1] + f[3] * inner(hx, x) / n2};
}

template <class S>
Sectional<S> xi_sectional(const FormData<S>& d, const Vec<S>& x) {
  const S n2 = norm2_checked(d, x);
  const auto& f = d.f;
  return {contract(d.r, x, d.xi, d.xi, x) / n2, f[0] - f[2] + (f[3] - f[5]) * inner(Vec<S>(d.h * x), x) / n2};
}

template <class S>
Sectional<S> phi_x_xi_sectional(const FormData<S>& d, const Vec<S>& x) {
  const S n2 = norm2_checked(d, x);
  const Vec<S> px = d.phi * x;
  const auto& f = d.f;
  return {contract(d.r, px, d.xi, d.xi, px) / n2, f[0] - f[2] + (f[3] - f[5]) * inner(Vec<S>(d.h * px), px) / n2};
}

template <class S>
std::vector<CheckResult> sectional_suite(const FormData<S>& d, unsigned seed, int random_vectors) {
  std::vector<CheckResult> out;
  const auto legs = legs_orthogonal_to_xi(d.xi);
  if (!legs) {
    for (const char* id : {"sectional.phi", "sectional.xi", "sectional.phi_x_xi"})
      out.push_back(skipped(id, "xi is not a frame leg"));
    return out;
  }
  const int n = d.dim();
  std::vector<Vec<S>> vectors;
  for (int i : *legs) vectors.push_back(leg<S>(n, i));
  // Rational unit vectors in the span of the legs, by inverse stereographic projection.
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
  const int m = static_cast<int>(legs->size());
  for (int k = 0; k < random_vectors; ++k) {
    std::vector<Rational> u(m - 1);
    Rational u2(0);
    for (auto& ui : u) {
      ui = Rational(num(rng), den(rng));
      u2 += ui * ui;
    }
    Vec<S> x = Vec<S>::Constant(n, S(0));
    for (int i = 0; i + 1 < m; ++i) x((*legs)[i]) = S(Rational(2) * u[i] / (u2 + Rational(1)));
    x((*legs)[m - 1]) = S((u2 - Rational(1)) / (u2 + Rational(1)));
    vectors.push_back(x);
  }

  std::vector<Residual> phi_res, xi_res, pxi_res, contact_res, indep_res;
  std::optional<S> first;
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const auto& x = vectors[k];
    const int idx = static_cast<int>(k);
    const auto ps = phi_sectional(d, x);
    record(phi_res, "K(X,phiX) = f1 + 3f2 + f4 g((h - phi h phi)X,X)", {idx}, ps.direct - ps.formula);
    const auto xs = xi_sectional(d, x);
    record(xi_res, "K(X,xi) = f1 - f3 + (f4 - f6) g(hX,X)", {idx}, xs.direct - xs.formula);
    const auto pxs = phi_x_xi_sectional(d, x);
    record(pxi_res, "K(phiX,xi) = f1 - f3 + (f4 - f6) g(h phiX, phiX)", {idx}, pxs.direct - pxs.formula);
    if (d.contact) {
      const auto& f = d.f;
      record(contact_res, "K(X,phiX) = f1 + 3f2", {idx}, ps.direct - (f[0] + S(3) * f[1]));
      const S hxx = inner(Vec<S>(d.h * x), x) / inner(x, x);
      record(contact_res, "K(phiX,xi) = f1 - f3 - (f4 - f6) g(hX,X)", {idx},
             pxs.direct - (f[0] - f[2] - (f[3] - f[5]) * hxx));
      if (!first) first = ps.direct;
      record(indep_res, "K(X,phiX) independent of X", {idx}, ps.direct - *first);
    }
  }
  const std::string detail = std::to_string(legs->size()) + " legs and " + std::to_string(random_vectors) +
                             " random unit vectors orthogonal to xi";
  out.push_back(from_residuals("sectional.phi", std::move(phi_res), detail));
  out.push_back(from_residuals("sectional.xi", std::move(xi_res), detail));
  out.push_back(from_residuals("sectional.phi_x_xi", std::move(pxi_res), detail));
  if (d.contact) {
    out.push_back(from_residuals("sectional.contact_formulas", std::move(contact_res), detail));
    out.push_back(from_residuals("sectional.phi_independent_of_X", std::move(indep_res), detail));
  } else {
    out.push_back(skipped("sectional.contact_formulas", "not contact metric"));
    out.push_back(skipped("sectional.phi_independent_of_X", "not contact metric"));
  }
  return out;
}

// ------------------------------------------------------------ identities

template <class S>
std::vector<CheckResult> identity_suite(const FormData<S>& d) {
  std::vector<CheckResult> out;
  const auto legs = legs_orthogonal_to_xi(d.xi);
  if (!legs) {
    out.push_back(skipped("identities", "xi is not a frame leg"));
    return out;
  }
  const int n = d.dim();
  const auto& f = d.f;
  const auto& B = d.blocks;
  const Tensor4<S> p = p_tensor(d.phi);
  const Tensor4<S> pt = p_tensor(d.deta);
  const Tensor4<S> r_minus = d.r - f[3] * B[3] - f[4] * B[4];

  std::vector<Residual> inv[4], inv_r, r4odd, r5even, rphi, p_id, sas_inv;
  const int keep[4] = {0, 1, 2, 5};
  for (int a : *legs)
    for (int b : *legs)
      for (int c : *legs)
        for (int e : *legs) {
          const Vec<S> x = leg<S>(n, a), y = leg<S>(n, b), z = leg<S>(n, c), w = leg<S>(n, e);
          const Vec<S> px = d.phi * x, py = d.phi * y, pz = d.phi * z, pw = d.phi * w;
          const std::vector<int> idx{a, b, c, e};
          auto conj = [&](const Tensor4<S>& t) { return contract(t, px, py, pz, pw) - contract(t, x, y, z, w); };
          for (int k = 0; k < 4; ++k) {
            const int i = keep[k];
            record(inv[k], "R" + std::to_string(i + 1) + "(phi.) = R" + std::to_string(i + 1), idx, conj(B[i]));
          }
          record(inv_r, "(R - f4 R4 - f5 R5)(phi.) = R - f4 R4 - f5 R5", idx, conj(r_minus));
          if (d.contact) {
            record(r4odd, "R4(phi.) = -R4", idx, contract(B[3], px, py, pz, pw) + contract(B[3], x, y, z, w));
            record(r5even, "R5(phi.) = R5", idx, conj(B[4]));
            record(rphi, "R(phi.) = R - 2 f4 R4", idx,
                   conj(d.r) + S(2) * f[3] * contract(B[3], x, y, z, w));
          }
          const Vec<S> hx = d.h * x, hy = d.h * y;
          const S lhs = contract(d.r, x, y, z, pw) + contract(d.r, x, y, pz, w);
          const S rhs = -(f[0] - f[1]) * contract(p, x, y, z, w) -
                        f[3] * (contract(p, hx, y, z, w) + contract(p, x, hy, z, w)) -
                        S(2) * f[4] * contract(p, hx, hy, z, w);
          record(p_id, "R(X,Y,Z,phiW) + R(X,Y,phiZ,W) = P-expansion", idx, lhs - rhs);
          if (d.sasakian) record(sas_inv, "R(phi.) = R", idx, conj(d.r));
        }

  const std::string detail = "all leg tuples orthogonal to xi";
  for (int k = 0; k < 4; ++k)
    out.push_back(from_residuals("identities.R" + std::to_string(keep[k] + 1) + "_phi_invariant", std::move(inv[k]), detail));
  out.push_back(from_residuals("identities.R_minus_f4R4_f5R5_phi_invariant", std::move(inv_r), detail));
  out.push_back(from_residuals("identities.P_expansion", std::move(p_id), detail));

  // Quadratic identity: legs and pairwise sums of legs.
  std::vector<Vec<S>> vecs;
  for (std::size_t i = 0; i < legs->size(); ++i) {
    vecs.push_back(leg<S>(n, (*legs)[i]));
    for (std::size_t j = i + 1; j < legs->size(); ++j) vecs.push_back(leg<S>(n, (*legs)[i]) + leg<S>(n, (*legs)[j]));
  }
  auto phi_plane = [&](const Tensor4<S>& pp, bool with_h, std::vector<Residual>& res, const char* name) {
    for (std::size_t i = 0; i < vecs.size(); ++i)
      for (std::size_t j = 0; j < vecs.size(); ++j) {
        const Vec<S>& x = vecs[i];
        const Vec<S>& y = vecs[j];
        const Vec<S> px = d.phi * x, py = d.phi * y;
        S v = contract(d.r, x, px, y, py) - contract(d.r, x, y, x, y) - contract(d.r, x, py, x, py);
        if (with_h) {
          v = v + S(2) * (f[0] - f[1]) * contract(pp, x, y, x, py) +
              S(2) * f[3] * contract(pp, x, y, Vec<S>(d.h * x), py);
        } else {
          v = v + S(2) * contract(pp, x, y, x, py);
        }
        record(res, name, {static_cast<int>(i), static_cast<int>(j)}, v);
      }
  };

  if (d.contact) {
    out.push_back(from_residuals("identities.contact.R4_phi_odd", std::move(r4odd), detail));
    out.push_back(from_residuals("identities.contact.R5_phi_even", std::move(r5even), detail));
    out.push_back(from_residuals("identities.contact.R_phi_conjugate", std::move(rphi), detail));
    std::vector<Residual> plane;
    phi_plane(p, true, plane, "R(X,phiX,Y,phiY) expansion");
    out.push_back(from_residuals("identities.contact.phi_plane", std::move(plane), "legs and sums of legs"));
    std::vector<Residual> same;
    record_tensor(same, "P = P~", Tensor4<S>(p - pt));
    out.push_back(from_residuals("identities.contact.P_equals_P_tilde", std::move(same)));
  } else {
    for (const char* id : {"identities.contact.R4_phi_odd", "identities.contact.R5_phi_even",
                           "identities.contact.R_phi_conjugate", "identities.contact.phi_plane",
                           "identities.contact.P_equals_P_tilde"})
      out.push_back(skipped(id, "not contact metric"));
  }

  if (d.sasakian) {
    std::vector<Residual> lemma;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int e = 0; e < n; ++e) {
            const Vec<S> x = leg<S>(n, a), y = leg<S>(n, b), z = leg<S>(n, c), w = leg<S>(n, e);
            const S v = contract(d.r, x, y, z, Vec<S>(d.phi * w)) + contract(d.r, x, y, Vec<S>(d.phi * z), w) +
                        pt(a, b, c, e);
            record(lemma, "R(X,Y,Z,phiW) + R(X,Y,phiZ,W) = -P~", {a, b, c, e}, v);
          }
    out.push_back(from_residuals("identities.sasakian.P_tilde", std::move(lemma), "all leg tuples"));
    out.push_back(from_residuals("identities.sasakian.phi_invariant", std::move(sas_inv), detail));
    std::vector<Residual> plane;
    phi_plane(pt, false, plane, "R(X,phiX,Y,phiY) = R(X,Y,X,Y) + R(X,phiY,X,phiY) - 2P~(X,Y,X,phiY)");
    out.push_back(from_residuals("identities.sasakian.phi_plane", std::move(plane), "legs and sums of legs"));
  } else {
    for (const char* id : {"identities.sasakian.P_tilde", "identities.sasakian.phi_invariant",
                           "identities.sasakian.phi_plane"})
      out.push_back(skipped(id, "not Sasakian"));
  }
  return out;
}

// ------------------------------------------------------------- Ricci

template <class S>
Mat<S> ricci_trace(const Tensor4<S>& r) {
  const int n = r.dim();
  Mat<S> q = Mat<S>::Constant(n, n, S(0));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      S v(0);
      for (int i = 0; i < n; ++i) v = v + r(i, j, k, i);
      q(j, k) = v;
    }
  return q;
}

template <class S>
Mat<S> ricci_formula(const FormData<S>& d) {
  const int dim = d.dim();
  const S n(d.n());
  const auto& f = d.f;
  const Mat<S> id = Mat<S>::Identity(dim, dim);
  const Mat<S> xx = d.xi * d.xi.transpose();
  return (S(2) * n * f[0] + S(3) * f[1] - f[2]) * id - (S(3) * f[1] + f[2] * (S(2) * n - S(1))) * xx +
         (f[3] * (S(2) * n - S(1)) - f[5]) * d.h;
}

template <class S>
S tau_formula(const Coeffs<S>& f) {
  return (S(3) * f[0] + S(3) * f[1] - S(2) * f[2]) / S(3);
}

template <class S>
S tau_sectional(const FormData<S>& d) {
  const auto legs = legs_orthogonal_to_xi(d.xi);
  if (!legs) throw InvalidArgument("xi is not a frame leg");
  const Vec<S> x = leg<S>(d.dim(), legs->front());
  return (phi_sectional(d, x).direct + xi_sectional(d, x).direct + phi_x_xi_sectional(d, x).direct) / S(3);
}

template <class S>
std::vector<CheckResult> ricci_suite(const FormData<S>& d) {
  std::vector<CheckResult> out;
  if (!d.contact) {
    for (const char* id : {"ricci.formula", "ricci.commutator", "ricci.S_xi_xi", "tau.formula_vs_sectional"})
      out.push_back(skipped(id, "not contact metric"));
    return out;
  }
  const auto& f = d.f;
  const Mat<S> q = ricci_trace(d.r);
  std::vector<Residual> res;
  record_matrix(res, "Q (trace) = Q (formula)", Mat<S>(q - ricci_formula(d)));
  out.push_back(from_residuals("ricci.formula", std::move(res)));

  const S n(d.n());
  const S coeff = f[3] * (S(2) * n - S(1)) - f[5];
  res.clear();
  record_matrix(res, "Q phi - phi Q = 2(f4(2n-1) - f6) h phi",
                Mat<S>(q * d.phi - d.phi * q - S(2) * coeff * (d.h * d.phi)));
  out.push_back(from_residuals("ricci.commutator", std::move(res)));

  res.clear();
  const S sxx = inner(Vec<S>(q * d.xi), d.xi);
  record(res, "S(xi,xi) = 2n(f1 - f3)", {}, sxx - S(2) * n * (f[0] - f[2]));
  out.push_back(from_residuals("ricci.S_xi_xi", std::move(res)));

  if (d.dim() == 3) {
    res.clear();
    const S t1 = tau_formula(f), t2 = tau_sectional(d);
    record(res, "tau formula = sectional average", {}, t1 - t2);
    out.push_back(from_residuals("tau.formula_vs_sectional", std::move(res), "tau = " + str(t1)));
  } else {
    out.push_back(skipped("tau.formula_vs_sectional", "dimension is not 3"));
  }
  return out;
}

template <class S>
Tensor4<S> reconstruct_3d(const FormData<S>& d) {
  if (d.dim() != 3) throw InvalidArgument("reconstruct_3d needs dimension 3");
  const auto& f = d.f;
  const auto& B = d.blocks;
  return (f[0] + S(3) * f[1]) * B[0] + (S(3) * f[1] + f[2]) * B[2] + (f[3] - f[5]) * B[3];
}

template <class S>
std::optional<S> three_d_tau_factor(const FormData<S>& d) {
  const int n = d.dim();
  const Mat<S> q = ricci_trace(d.r);
  const S tau = tau_sectional(d);
  auto delta = [](int i, int j) { return i == j ? S(1) : S(0); };
  Tensor4<S> g(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int e = 0; e < n; ++e)
          g(a, b, c, e) = delta(b, c) * q(e, a) - delta(a, c) * q(e, b) + q(c, b) * delta(a, e) - q(c, a) * delta(b, e);
  const Tensor4<S> diff = g - d.r;
  const Tensor4<S> unit = tau * d.blocks[0];
  std::optional<S> t;
  for (Eigen::Index i = 0; i < unit.flat().size(); ++i) {
    if (is_zero(unit.flat()(i))) continue;
    t = diff.flat()(i) / unit.flat()(i);
    break;
  }
  if (!t) return diff.is_zero() ? std::optional<S>(S(0)) : std::nullopt;
  if (!(diff - *t * unit).is_zero()) return std::nullopt;
  return t;
}

template <class S>
bool EtaEinstein<S>::consistent() const {
  return criterion == eta_einstein && criterion == commutes && criterion == km0_space && criterion == f4_eq_f6;
}

template <class S>
EtaEinstein<S> eta_einstein_check(const FormData<S>& d) {
  EtaEinstein<S> e;
  const auto& f = d.f;
  const S n(d.n());
  e.criterion = is_zero(f[3] * (S(2) * n - S(1)) - f[5]);
  e.f4_eq_f6 = is_zero(f[3] - f[5]);
  const Mat<S> q = ricci_trace(d.r);
  const auto legs = legs_orthogonal_to_xi(d.xi);
  if (legs) {
    const S a = q(legs->front(), legs->front());
    const S b = inner(Vec<S>(q * d.xi), d.xi) - a;
    const int dim = d.dim();
    e.eta_einstein = is_zero_matrix<S>(Mat<S>(q - a * Mat<S>::Identity(dim, dim) - b * (d.xi * d.xi.transpose())));
  }
  e.commutes = is_zero_matrix<S>(Mat<S>(q * d.phi - d.phi * q));
  e.km0_space = km_residuals(d, S(f[0] - f[2]), S(0)).empty();
  return e;
}

template <class S>
std::vector<CheckResult> three_d_suite(const FormData<S>& d) {
  std::vector<CheckResult> out;
  const char* ids[] = {"blocks.kernel_identities", "reconstruct_3d.three_term", "curvature.3d_identity",
                       "eta_einstein.equivalence"};
  if (d.dim() != 3 || !d.contact) {
    for (const char* id : ids) out.push_back(skipped(id, d.dim() != 3 ? "dimension is not 3" : "not contact metric"));
    return out;
  }
  const auto& B = d.blocks;
  std::vector<Residual> res;
  record_tensor(res, "-R1 + R2/3 - R3 = 0", Tensor4<S>(S(Rational(1, 3)) * B[1] - B[0] - B[2]));
  record_tensor(res, "R4 + R6 = 0", Tensor4<S>(B[3] + B[5]));
  record_tensor(res, "R5 = 0", B[4]);
  out.push_back(from_residuals(ids[0], std::move(res)));

  res.clear();
  record_tensor(res, "(f1+3f2)R1 + (3f2+f3)R3 + (f4-f6)R4 = R", Tensor4<S>(reconstruct_3d(d) - d.r));
  out.push_back(from_residuals(ids[1], std::move(res)));

  const auto t = three_d_tau_factor(d);
  if (!t) {
    out.push_back({ids[2], Status::Fail, "no single factor t makes the tau term exact", {}});
  } else if constexpr (std::is_same_v<S, Expr>) {
    if (!t->is_constant()) {
      out.push_back({ids[2], Status::Fail, "tau factor is not constant: " + t->str(), {}});
    } else {
      out.push_back({ids[2], Status::Pass, "tau factor = " + t->str(), {}});
    }
  } else {
    out.push_back({ids[2], Status::Pass, "tau factor = " + str(*t), {}});
  }

  const auto e = eta_einstein_check(d);
  std::ostringstream os;
  os << std::boolalpha << "eta_einstein=" << e.eta_einstein << " Q_phi_commute=" << e.commutes
     << " km0_space=" << e.km0_space << " f4_eq_f6=" << e.f4_eq_f6;
  out.push_back({ids[3], e.consistent() ? Status::Pass : Status::Fail, os.str(), {}});
  return out;
}

// ------------------------------------------------ constant (kappa, mu)

Tensor4<Expr> boeckx_curvature(const FormData<Expr>& d, const Expr& kappa, const Expr& mu) {
  const int n = d.dim();
  const auto& B = d.blocks;
  const Expr half_mu = mu / Expr(2);
  const Mat<Expr> ph = d.phi * d.h;
  Tensor4<Expr> hh(n), pp(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int e = 0; e < n; ++e) {
          hh(a, b, c, e) = d.h(c, b) * d.h(e, a) - d.h(c, a) * d.h(e, b);
          pp(a, b, c, e) = ph(e, b) * ph(c, a) - ph(c, b) * ph(e, a);
        }
  const Expr one(1);
  return (one - half_mu) * B[0] - half_mu * B[1] + (one - half_mu - kappa) * B[2] + B[3] +
         ((one - half_mu) / (one - kappa)) * hh + ((half_mu - kappa) / (one - kappa)) * pp + (one - mu) * B[5];
}

std::vector<CheckResult> constant_km_suite(const FormData<Expr>& d) {
  std::vector<CheckResult> out;
  // eigen.<x><y><z>: X, Y, Z taken from D(lambda) (plus) or D(-lambda) (minus)
  const char* ids[] = {"eigen.plus_plus_minus",  "eigen.minus_minus_plus", "eigen.plus_minus_minus",
                       "eigen.plus_minus_plus",  "eigen.plus_plus_plus",   "eigen.minus_minus_minus",
                       "ricci.constant_km_form", "boeckx"};
  const auto km = km_of(d.f);
  std::string why;
  if (!d.contact) why = "not contact metric";
  else if (!km.kappa.is_constant() || !km.mu.is_constant()) why = "kappa, mu are not constant";
  else if (km.kappa == Expr(1)) why = "kappa = 1 (Sasakian)";
  else if (*km.kappa.constant_value() > Rational(1)) why = "kappa > 1";
  if (!why.empty()) {
    for (const char* id : ids) out.push_back(skipped(id, why));
    return out;
  }
  const Expr& kappa = km.kappa;
  const Expr& mu = km.mu;
  const int n = d.dim();
  const Expr lambda = Expr::sqrt(Expr(1) - kappa);
  const Mat<Expr> id = Mat<Expr>::Identity(n, n);
  const Mat<Expr> plus = nullspace<Expr>(Mat<Expr>(d.h - lambda * id));
  const Mat<Expr> minus = nullspace<Expr>(Mat<Expr>(d.h + lambda * id));
  auto cols = [](const Mat<Expr>& m) {
    std::vector<Vec<Expr>> v;
    for (int j = 0; j < m.cols(); ++j) v.push_back(m.col(j));
    return v;
  };
  const auto P = cols(plus), M = cols(minus);
  auto g = [](const Vec<Expr>& x, const Vec<Expr>& y) { return inner(x, y); };
  auto ph = [&](const Vec<Expr>& x) { return Vec<Expr>(d.phi * x); };

  using Rhs = std::function<Vec<Expr>(const Vec<Expr>&, const Vec<Expr>&, const Vec<Expr>&)>;
  auto run = [&](const char* id, const std::vector<Vec<Expr>>& xs, const std::vector<Vec<Expr>>& ys,
                 const std::vector<Vec<Expr>>& zs, const Rhs& rhs) {
    std::vector<Residual> res;
    bool vacuous = true;
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < ys.size(); ++j)
        for (std::size_t k = 0; k < zs.size(); ++k) {
          const Vec<Expr> lhs = apply_r(d.r, xs[i], ys[j], zs[k]);
          const Vec<Expr> r = rhs(xs[i], ys[j], zs[k]);
          if (!all_zero(lhs) || !all_zero(r)) vacuous = false;
          for (int c = 0; c < n; ++c)
            record(res, id, {static_cast<int>(i), static_cast<int>(j), static_cast<int>(k), c}, Expr(lhs(c) - r(c)));
        }
    CheckResult cr = from_residuals(id, std::move(res), "lambda = " + lambda.str());
    if (cr.status == Status::Pass && vacuous) cr.status = Status::Vacuous;
    out.push_back(std::move(cr));
  };
  const Expr two(2);
  run(ids[0], P, P, M, [&](auto& x, auto& y, auto& z) {
    return Vec<Expr>((kappa - mu) * (g(ph(y), z) * ph(x) - g(ph(x), z) * ph(y)));
  });
  run(ids[1], M, M, P, [&](auto& x, auto& y, auto& z) {
    return Vec<Expr>((kappa - mu) * (g(ph(y), z) * ph(x) - g(ph(x), z) * ph(y)));
  });
  run(ids[2], P, M, M, [&](auto& x, auto& y, auto& z) {
    return Vec<Expr>(kappa * g(ph(x), z) * ph(y) + mu * g(ph(x), y) * ph(z));
  });
  run(ids[3], P, M, P, [&](auto& x, auto& y, auto& z) {
    return Vec<Expr>(-kappa * g(ph(y), z) * ph(x) - mu * g(ph(y), x) * ph(z));
  });
  run(ids[4], P, P, P, [&](auto& x, auto& y, auto& z) {
    return Vec<Expr>((two * (Expr(1) + lambda) - mu) * (g(y, z) * x - g(x, z) * y));
  });
  run(ids[5], M, M, M, [&](auto& x, auto& y, auto& z) {
    return Vec<Expr>((two * (Expr(1) - lambda) - mu) * (g(y, z) * x - g(x, z) * y));
  });

  const Expr nn(d.n());
  const Mat<Expr> q_const = (two * (nn - Expr(1)) - nn * mu) * id +
                         (two * (Expr(1) - nn) + nn * (two * kappa + mu)) * (d.xi * d.xi.transpose()) +
                         (two * (nn - Expr(1)) + mu) * d.h;
  std::vector<Residual> res;
  record_matrix(res, "Q = (2(n-1) - n mu) I + (2(1-n) + n(2 kappa + mu)) eta(x)xi + (2(n-1) + mu) h",
                Mat<Expr>(ricci_trace(d.r) - q_const));
  out.push_back(from_residuals(ids[6], std::move(res)));

  res.clear();
  record_tensor(res, "Boeckx form = R", Tensor4<Expr>(boeckx_curvature(d, kappa, mu) - d.r));
  out.push_back(from_residuals(ids[7], std::move(res)));
  return out;
}

CheckResult kappa_bound(const FormData<Rational>& d) {
  const Rational kappa = d.f[0] - d.f[2];
  if (kappa > Rational(1)) return {"kappa.bound", Status::Fail, "kappa = " + kappa.str() + " > 1", {}};
  if (kappa == Rational(1) && !is_zero_matrix<Rational>(d.h))
    return {"kappa.bound", Status::Fail, "kappa = 1 but h != 0", {}};
  return {"kappa.bound", Status::Pass, "kappa = " + kappa.str(), {}};
}

#define KMSF_INSTANTIATE(S)                                                                               \
  template BlockTensors<S> build_blocks<S>(const Mat<S>&, const Vec<S>&, const Mat<S>&);                  \
  template Tensor4<S> combine<S>(const BlockTensors<S>&, const Coeffs<S>&);                               \
  template S contract<S>(const Tensor4<S>&, const Vec<S>&, const Vec<S>&, const Vec<S>&, const Vec<S>&); \
  template Tensor4<S> p_tensor<S>(const Mat<S>&);                                                         \
  template std::optional<std::vector<int>> legs_orthogonal_to_xi<S>(const Vec<S>&);                       \
  template std::vector<Residual> km_residuals<S>(const FormData<S>&, const S&, const S&);                  \
  template Sectional<S> phi_sectional<S>(const FormData<S>&, const Vec<S>&);                              \
  template Sectional<S> xi_sectional<S>(const FormData<S>&, const Vec<S>&);                               \
  template Sectional<S> phi_x_xi_sectional<S>(const FormData<S>&, const Vec<S>&);                         \
  template std::vector<CheckResult> sectional_suite<S>(const FormData<S>&, unsigned, int);                \
  template std::vector<CheckResult> identity_suite<S>(const FormData<S>&);                                \
  template Mat<S> ricci_trace<S>(const Tensor4<S>&);                                                      \
  template Mat<S> ricci_formula<S>(const FormData<S>&);                                                   \
  template S tau_formula<S>(const Coeffs<S>&);                                                            \
  template S tau_sectional<S>(const FormData<S>&);                                                        \
  template std::vector<CheckResult> ricci_suite<S>(const FormData<S>&);                                   \
  template Tensor4<S> reconstruct_3d<S>(const FormData<S>&);                                              \
  template std::optional<S> three_d_tau_factor<S>(const FormData<S>&);                                    \
  template struct EtaEinstein<S>;                                                                         \
  template EtaEinstein<S> eta_einstein_check<S>(const FormData<S>&);                                      \
  template std::vector<CheckResult> three_d_suite<S>(const FormData<S>&);

KMSF_INSTANTIATE(Rational)
KMSF_INSTANTIATE(Expr)

#undef KMSF_INSTANTIATE

}  // namespace kmsf
