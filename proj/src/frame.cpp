#include "kmsf/frame.hpp"

#include <algorithm>

#include "kmsf/errors.hpp"

namespace kmsf {

FramedChart FramedChart::from_frame(std::vector<std::string> coordinates, Mat<Expr> frame,
                                    std::vector<Expr> nonvanishing) {
  const int n = static_cast<int>(coordinates.size());
  if (n < 1) throw InvalidArgument("chart needs at least one coordinate");
  if (frame.rows() != n || frame.cols() != n)
    throw InvalidArgument("frame matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  if (is_zero(determinant<Expr>(frame))) throw DomainError("frame is not invertible on the chart");
  FramedChart ch;
  ch.n_ = n;
  ch.coordinates_ = std::move(coordinates);
  ch.frame_ = std::move(frame);
  ch.nonvanishing_ = std::move(nonvanishing);
  return ch;
}

FramedChart FramedChart::from_structure_constants(StructureCoefficients c) {
  FramedChart ch;
  ch.n_ = c.dim();
  if (ch.n_ < 1) throw InvalidArgument("empty structure constants");
  ch.frame_ = Mat<Expr>::Identity(ch.n_, ch.n_);
  ch.seeded_ = std::move(c);
  return ch;
}

Expr FramedChart::partial(const Expr& f, const std::string& coordinate) const {
  if (std::find(coordinates_.begin(), coordinates_.end(), coordinate) == coordinates_.end())
    throw InvalidArgument("unknown coordinate '" + coordinate + "'");
  return f.diff(coordinate);
}

Expr FramedChart::apply(int i, const Expr& f) const {
  if (is_lie() || f.is_constant()) return Expr(0);
  Expr out;
  for (int j = 0; j < n_; ++j) {
    if (frame_(i, j).is_zero()) continue;
    const Expr d = f.diff(coordinates_[j]);
    if (!d.is_zero()) out += frame_(i, j) * d;
  }
  return out;
}

void FramedChart::check_point(const Point& p) const {
  // Coordinates absent from p stay symbolic; a constraint only fails when it
  // vanishes identically after substitution.
  for (const auto& e : nonvanishing_) {
    if (e.partial_eval(p).is_zero()) throw DomainError("domain constraint " + e.str() + " != 0 violated");
  }
}

StructureCoefficients brackets(const FramedChart& chart) {
  if (chart.is_lie()) return chart.seeded_brackets();
  const int n = chart.dim();
  const Mat<Expr>& e = chart.frame();
  const Mat<Expr> inv = inverse<Expr>(e);
  StructureCoefficients c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      // Coordinate components of [e_i, e_j].
      Vec<Expr> w = Vec<Expr>::Constant(n, Expr(0));
      for (int m = 0; m < n; ++m) w(m) = chart.apply(i, e(j, m)) - chart.apply(j, e(i, m));
      const Vec<Expr> comp = inv.transpose() * w;
      for (int k = 0; k < n; ++k) {
        c(i, j, k) = comp(k);
        c(j, i, k) = -comp(k);
      }
    }
  }
  return c;
}

ConnectionCoefficients koszul_connection(const StructureCoefficients& c) {
  const int n = c.dim();
  ConnectionCoefficients g(n);
  const Expr half(Rational(1, 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) g(i, j, k) = half * (c(i, j, k) - c(j, k, i) + c(k, i, j));
  return g;
}

CurvatureTensor curvature(const FramedChart& chart, const ConnectionCoefficients& gamma,
                          const StructureCoefficients& c) {
  const int n = chart.dim();
  CurvatureTensor r(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          Expr v = chart.apply(i, gamma(j, k, l)) - chart.apply(j, gamma(i, k, l));
          for (int m = 0; m < n; ++m) {
            v += gamma(j, k, m) * gamma(i, m, l) - gamma(i, k, m) * gamma(j, m, l) - c(i, j, m) * gamma(m, k, l);
          }
          r(i, j, k, l) = v;
        }
      }
    }
  }
  return r;
}

Expr sectional_curvature(const CurvatureTensor& r, int a, int b) {
  if (a == b) throw InvalidArgument("sectional curvature needs two distinct legs");
  return r(a, b, b, a);
}

FrameGeometry::FrameGeometry(FramedChart ch) : chart(std::move(ch)) {
  c = brackets(chart);
  gamma = koszul_connection(c);
  r = curvature(chart, gamma, c);
}

Vec<Expr> unit(int n, int i) {
  Vec<Expr> v = Vec<Expr>::Constant(n, Expr(0));
  v(i) = Expr(1);
  return v;
}

Expr derive_along(const FrameGeometry& geo, const Vec<Expr>& x, const Expr& f) {
  Expr out;
  for (int a = 0; a < geo.dim(); ++a) {
    if (!x(a).is_zero()) out += x(a) * geo.chart.apply(a, f);
  }
  return out;
}

Vec<Expr> lie_bracket(const FrameGeometry& geo, const Vec<Expr>& x, const Vec<Expr>& y) {
  const int n = geo.dim();
  Vec<Expr> out(n);
  for (int k = 0; k < n; ++k) {
    Expr v = derive_along(geo, x, y(k)) - derive_along(geo, y, x(k));
    for (int a = 0; a < n; ++a) {
      if (x(a).is_zero()) continue;
      for (int b = 0; b < n; ++b) {
        if (!y(b).is_zero()) v += x(a) * y(b) * geo.c(a, b, k);
      }
    }
    out(k) = v;
  }
  return out;
}

Vec<Expr> covariant(const FrameGeometry& geo, const Vec<Expr>& x, const Vec<Expr>& y) {
  const int n = geo.dim();
  Vec<Expr> out(n);
  for (int k = 0; k < n; ++k) {
    Expr v = derive_along(geo, x, y(k));
    for (int a = 0; a < n; ++a) {
      if (x(a).is_zero()) continue;
      for (int b = 0; b < n; ++b) {
        if (!y(b).is_zero()) v += x(a) * y(b) * geo.gamma(a, b, k);
      }
    }
    out(k) = v;
  }
  return out;
}

namespace {

void record(std::vector<Residual>& out, const char* name, std::vector<int> idx, const Expr& v) {
  if (!v.is_zero()) out.push_back({name, std::move(idx), v});
}

}  // namespace

std::vector<Residual> check_bracket_antisymmetry(const StructureCoefficients& c) {
  std::vector<Residual> out;
  const int n = c.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) record(out, "bracket antisymmetry", {i, j, k}, c(i, j, k) + c(j, i, k));
  return out;
}

std::vector<Residual> check_jacobi(const FramedChart& chart, const StructureCoefficients& c) {
  // Component l of [[e_i,e_j],e_k] = sum_m c_ij^m c_mk^l - e_k(c_ij^l).
  const int n = c.dim();
  auto term = [&](int i, int j, int k, int l) {
    Expr v = -chart.apply(k, c(i, j, l));
    for (int m = 0; m < n; ++m) v += c(i, j, m) * c(m, k, l);
    return v;
  };
  std::vector<Residual> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = 0; l < n; ++l)
          record(out, "Jacobi", {i, j, k, l}, term(i, j, k, l) + term(j, k, i, l) + term(k, i, j, l));
  return out;
}

std::vector<Residual> check_metric_compatibility(const ConnectionCoefficients& g) {
  std::vector<Residual> out;
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) record(out, "metric compatibility", {i, j, k}, g(i, j, k) + g(i, k, j));
  return out;
}

std::vector<Residual> check_torsion_free(const ConnectionCoefficients& g, const StructureCoefficients& c) {
  std::vector<Residual> out;
  const int n = g.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) record(out, "torsion", {i, j, k}, g(i, j, k) - g(j, i, k) - c(i, j, k));
  return out;
}

std::vector<Residual> check_curvature_symmetries(const CurvatureTensor& r) {
  std::vector<Residual> out;
  const int n = r.dim();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          record(out, "R_abcd = -R_bacd", {a, b, c, d}, r(a, b, c, d) + r(b, a, c, d));
          record(out, "R_abcd = -R_abdc", {a, b, c, d}, r(a, b, c, d) + r(a, b, d, c));
          record(out, "R_abcd = R_cdab", {a, b, c, d}, r(a, b, c, d) - r(c, d, a, b));
        }
  return out;
}

std::vector<Residual> check_first_bianchi(const CurvatureTensor& r) {
  std::vector<Residual> out;
  const int n = r.dim();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          record(out, "first Bianchi", {a, b, c, d}, r(a, b, c, d) + r(b, c, a, d) + r(c, a, b, d));
  return out;
}

}  // namespace kmsf
