#pragma once

#include <string>
#include <vector>

#include "kmsf/frame.hpp"

namespace kmsf {

/// Normalization of the exterior derivative of a 1-form:
/// Half: d eta(X,Y) = 1/2 (X eta(Y) - Y eta(X) - eta([X,Y])); Full drops the 1/2.
enum class DEtaConvention { Half, Full };
std::string to_string(DEtaConvention c);

/// Almost contact metric structure (phi, xi, eta, g) on a framed chart.
/// Column b of phi holds the frame components of phi(e_b); eta is the dual
/// of xi under the orthonormal metric, so its components equal xi's.
/// h = (1/2) L_xi phi is computed at construction.
class AcmStructure {
 public:
  AcmStructure(GeometryPtr geometry, Mat<Expr> phi, Vec<Expr> xi);

  const FrameGeometry& geometry() const { return *geo_; }
  const GeometryPtr& geometry_ptr() const { return geo_; }
  int dim() const { return geo_->dim(); }
  const Mat<Expr>& phi() const { return phi_; }
  const Vec<Expr>& xi() const { return xi_; }
  const Vec<Expr>& eta() const { return xi_; }
  const Mat<Expr>& h() const { return h_; }

  /// eta(xi) = 1, phi xi = 0, eta o phi = 0, phi^2 = -I + xi eta,
  /// phi^T phi = I - xi xi^T.
  std::vector<Residual> structure_residuals() const;
  /// h xi = 0, h phi = -phi h, tr h = 0, eta o h = 0, h symmetric.
  std::vector<Residual> h_residuals() const;
  /// nabla_X xi = -phi X - phi h X on frame legs.
  std::vector<Residual> nabla_xi_residuals() const;

  /// Matrix of d eta(e_i, e_j).
  Mat<Expr> d_eta(DEtaConvention c) const;
  /// d eta(e_i, e_j) - g(e_i, phi e_j).
  std::vector<Residual> contact_residuals(DEtaConvention c) const;
  bool is_contact_metric(DEtaConvention c) const { return contact_residuals(c).empty(); }

  /// nabla_X xi + phi X on frame legs.
  std::vector<Residual> k_contact_residuals() const;
  bool is_k_contact() const { return k_contact_residuals().empty(); }
  /// (nabla_X phi)Y - g(X,Y) xi + eta(Y) X on frame legs.
  std::vector<Residual> sasakian_residuals() const;
  bool is_sasakian() const { return sasakian_residuals().empty(); }

  /// (nabla_{e_i} phi) as a matrix: column j is (nabla_{e_i} phi) e_j.
  Mat<Expr> nabla_phi(int i) const;
  /// nabla_{e_i} xi.
  Vec<Expr> nabla_xi(int i) const;

 private:
  GeometryPtr geo_;
  Mat<Expr> phi_;
  Vec<Expr> xi_;
  Mat<Expr> h_;
};

/// h from 2 h e_j = [xi, phi e_j] - phi [xi, e_j].
Mat<Expr> compute_h(const FrameGeometry& geo, const Mat<Expr>& phi, const Vec<Expr>& xi);

struct TransSasakianReport {
  bool holds = false;
  std::vector<Residual> residuals;
  /// Consequences that must follow when `holds`: nabla_xi phi = 0,
  /// nabla_xi xi = 0, the nabla xi formula, h = 0, and (on contact metric
  /// structures) alpha = 1, beta = 0. Any nonzero entry is an internal
  /// inconsistency.
  std::vector<Residual> violated_consequences;
};

TransSasakianReport check_trans_sasakian(const AcmStructure& s, const Expr& alpha, const Expr& beta,
                                         DEtaConvention convention);

}  // namespace kmsf
