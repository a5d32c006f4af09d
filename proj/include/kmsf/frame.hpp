#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kmsf/linalg.hpp"

namespace kmsf {

/// c(i,j,k) with [e_i, e_j] = sum_k c(i,j,k) e_k.
using StructureCoefficients = Tensor3<Expr>;
/// gamma(i,j,k) with nabla_{e_i} e_j = sum_k gamma(i,j,k) e_k.
using ConnectionCoefficients = Tensor3<Expr>;
/// R(a,b,c,d) = g(R(e_a,e_b)e_c, e_d), R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
using CurvatureTensor = Tensor4<Expr>;

/// An orthonormal frame on a coordinate chart. The metric is the one that
/// makes the frame orthonormal.
///
/// Two modes: a coordinate frame (row i of the frame matrix holds the
/// coefficients of e_i on d/dx_j), or a left-invariant frame on a Lie group
/// given directly by constant structure constants, where e_i(f) = 0 for all
/// scalar data.
class FramedChart {
 public:
  static FramedChart from_frame(std::vector<std::string> coordinates, Mat<Expr> frame,
                                std::vector<Expr> nonvanishing = {});
  static FramedChart from_structure_constants(StructureCoefficients c);

  int dim() const { return n_; }
  bool is_lie() const { return coordinates_.empty(); }
  const std::vector<std::string>& coordinates() const { return coordinates_; }
  const Mat<Expr>& frame() const { return frame_; }
  const std::vector<Expr>& nonvanishing() const { return nonvanishing_; }

  /// Partial derivative along a chart coordinate; unknown names are an error.
  Expr partial(const Expr& f, const std::string& coordinate) const;
  /// Directional derivative e_i(f).
  Expr apply(int i, const Expr& f) const;

  /// Throws DomainError when a nonvanishing constraint vanishes at p.
  void check_point(const Point& p) const;

  const StructureCoefficients& seeded_brackets() const { return seeded_; }

 private:
  int n_ = 0;
  std::vector<std::string> coordinates_;
  Mat<Expr> frame_;
  std::vector<Expr> nonvanishing_;
  StructureCoefficients seeded_;
};

StructureCoefficients brackets(const FramedChart& chart);
ConnectionCoefficients koszul_connection(const StructureCoefficients& c);
CurvatureTensor curvature(const FramedChart& chart, const ConnectionCoefficients& gamma,
                          const StructureCoefficients& c);
/// K(e_a, e_b) = R(a,b,b,a).
Expr sectional_curvature(const CurvatureTensor& r, int a, int b);

/// Brackets, connection and curvature of a chart, computed once.
struct FrameGeometry {
  FramedChart chart;
  StructureCoefficients c;
  ConnectionCoefficients gamma;
  CurvatureTensor r;

  explicit FrameGeometry(FramedChart ch);
  int dim() const { return chart.dim(); }
};

using GeometryPtr = std::shared_ptr<const FrameGeometry>;

/// Frame-component vector field operations on a computed geometry.
/// Vectors are frame components (V = sum V^k e_k).
/// X(f).
Expr derive_along(const FrameGeometry& geo, const Vec<Expr>& x, const Expr& f);
Vec<Expr> lie_bracket(const FrameGeometry& geo, const Vec<Expr>& x, const Vec<Expr>& y);
Vec<Expr> covariant(const FrameGeometry& geo, const Vec<Expr>& x, const Vec<Expr>& y);
Vec<Expr> unit(int n, int i);

/// A nonzero residual: which identity, at which index tuple, and its value.
struct Residual {
  std::string identity;
  std::vector<int> index;
  Expr value;
};

std::vector<Residual> check_bracket_antisymmetry(const StructureCoefficients& c);
std::vector<Residual> check_jacobi(const FramedChart& chart, const StructureCoefficients& c);
std::vector<Residual> check_metric_compatibility(const ConnectionCoefficients& gamma);
std::vector<Residual> check_torsion_free(const ConnectionCoefficients& gamma, const StructureCoefficients& c);
std::vector<Residual> check_curvature_symmetries(const CurvatureTensor& r);
std::vector<Residual> check_first_bianchi(const CurvatureTensor& r);

}  // namespace kmsf
