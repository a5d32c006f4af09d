#include "kmsf/acm.hpp"

#include "kmsf/errors.hpp"

namespace kmsf {

std::string to_string(DEtaConvention c) {
  return c == DEtaConvention::Half ? "deta(X,Y) = 1/2 (X eta(Y) - Y eta(X) - eta([X,Y]))"
                                   : "deta(X,Y) = X eta(Y) - Y eta(X) - eta([X,Y])";
}

namespace {

void record(std::vector<Residual>& out, const char* name, std::vector<int> idx, const Expr& v) {
  if (!v.is_zero()) out.push_back({name, std::move(idx), v});
}

void record_matrix(std::vector<Residual>& out, const char* name, const Mat<Expr>& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) record(out, name, {i, j}, m(i, j));
}

void record_vector(std::vector<Residual>& out, const char* name, const Vec<Expr>& v, int leg = -1) {
  for (int k = 0; k < v.size(); ++k) {
    if (leg < 0) {
      record(out, name, {k}, v(k));
    } else {
      record(out, name, {leg, k}, v(k));
    }
  }
}

}  // namespace

Mat<Expr> compute_h(const FrameGeometry& geo, const Mat<Expr>& phi, const Vec<Expr>& xi) {
  const int n = geo.dim();
  Mat<Expr> h(n, n);
  const Expr half(Rational(1, 2));
  for (int j = 0; j < n; ++j) {
    const Vec<Expr> ej = unit(n, j);
    const Vec<Expr> col = lie_bracket(geo, xi, phi.col(j)) - phi * lie_bracket(geo, xi, ej);
    for (int k = 0; k < n; ++k) h(k, j) = half * col(k);
  }
  return h;
}

AcmStructure::AcmStructure(GeometryPtr geometry, Mat<Expr> phi, Vec<Expr> xi)
    : geo_(std::move(geometry)), phi_(std::move(phi)), xi_(std::move(xi)) {
  const int n = geo_->dim();
  if (phi_.rows() != n || phi_.cols() != n) throw InvalidArgument("phi must be " + std::to_string(n) + "x" + std::to_string(n));
  if (xi_.size() != n) throw InvalidArgument("xi must have " + std::to_string(n) + " components");
  h_ = compute_h(*geo_, phi_, xi_);
}

std::vector<Residual> AcmStructure::structure_residuals() const {
  const int n = dim();
  std::vector<Residual> out;
  record(out, "eta(xi) = 1", {}, xi_.dot(xi_) - Expr(1));
  record_vector(out, "phi xi = 0", phi_ * xi_);
  record_vector(out, "eta o phi = 0", phi_.transpose() * xi_);
  const Mat<Expr> id = Mat<Expr>::Identity(n, n);
  record_matrix(out, "phi^2 = -I + xi (x) eta", phi_ * phi_ + id - xi_ * xi_.transpose());
  record_matrix(out, "g(phi X, phi Y) = g(X,Y) - eta(X) eta(Y)", phi_.transpose() * phi_ - id + xi_ * xi_.transpose());
  return out;
}

std::vector<Residual> AcmStructure::h_residuals() const {
  std::vector<Residual> out;
  record_vector(out, "h xi = 0", h_ * xi_);
  record_matrix(out, "h phi = -phi h", h_ * phi_ + phi_ * h_);
  record(out, "tr h = 0", {}, h_.trace());
  record_vector(out, "eta o h = 0", h_.transpose() * xi_);
  record_matrix(out, "h symmetric", h_ - h_.transpose());
  return out;
}

Vec<Expr> AcmStructure::nabla_xi(int i) const { return covariant(*geo_, unit(dim(), i), xi_); }

Mat<Expr> AcmStructure::nabla_phi(int i) const {
  const int n = dim();
  const Vec<Expr> ei = unit(n, i);
  Mat<Expr> m(n, n);
  for (int j = 0; j < n; ++j) {
    Vec<Expr> nabla_ij(n);
    for (int k = 0; k < n; ++k) nabla_ij(k) = geo_->gamma(i, j, k);
    m.col(j) = covariant(*geo_, ei, phi_.col(j)) - phi_ * nabla_ij;
  }
  return m;
}

std::vector<Residual> AcmStructure::nabla_xi_residuals() const {
  std::vector<Residual> out;
  const Mat<Expr> phih = phi_ * h_;
  for (int i = 0; i < dim(); ++i)
    record_vector(out, "nabla_X xi = -phi X - phi h X", nabla_xi(i) + phi_.col(i) + phih.col(i), i);
  return out;
}

Mat<Expr> AcmStructure::d_eta(DEtaConvention c) const {
  const int n = dim();
  const Expr factor = c == DEtaConvention::Half ? Expr(Rational(1, 2)) : Expr(1);
  Mat<Expr> d = Mat<Expr>::Constant(n, n, Expr(0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Expr eta_bracket;
      for (int k = 0; k < n; ++k) eta_bracket += geo_->c(i, j, k) * xi_(k);
      d(i, j) = factor * (geo_->chart.apply(i, xi_(j)) - geo_->chart.apply(j, xi_(i)) - eta_bracket);
      d(j, i) = -d(i, j);
    }
  }
  return d;
}

std::vector<Residual> AcmStructure::contact_residuals(DEtaConvention c) const {
  const Mat<Expr> d = d_eta(c);
  std::vector<Residual> out;
  for (int i = 0; i < dim(); ++i)
    for (int j = i + 1; j < dim(); ++j) record(out, "deta = Phi", {i, j}, d(i, j) - phi_(i, j));
  return out;
}

std::vector<Residual> AcmStructure::k_contact_residuals() const {
  std::vector<Residual> out;
  for (int i = 0; i < dim(); ++i) record_vector(out, "nabla_X xi = -phi X", nabla_xi(i) + phi_.col(i), i);
  return out;
}

std::vector<Residual> AcmStructure::sasakian_residuals() const {
  const int n = dim();
  std::vector<Residual> out;
  for (int i = 0; i < n; ++i) {
    // (nabla_{e_i} phi) e_j - delta_ij xi + xi_j e_i.
    Mat<Expr> m = nabla_phi(i);
    for (int j = 0; j < n; ++j) {
      if (i == j) m.col(j) -= xi_;
      m(i, j) += xi_(j);
    }
    for (int j = 0; j < n; ++j) record_vector(out, "(nabla_X phi)Y = g(X,Y) xi - eta(Y) X", m.col(j), i * n + j);
  }
  return out;
}

TransSasakianReport check_trans_sasakian(const AcmStructure& s, const Expr& alpha, const Expr& beta,
                                         DEtaConvention convention) {
  const int n = s.dim();
  const Mat<Expr>& phi = s.phi();
  const Vec<Expr>& xi = s.xi();
  TransSasakianReport rep;
  for (int i = 0; i < n; ++i) {
    Mat<Expr> m = s.nabla_phi(i);
    for (int j = 0; j < n; ++j) {
      // alpha (g(X,Y) xi - eta(Y) X) + beta (g(phi X, Y) xi - eta(Y) phi X)
      Vec<Expr> rhs = -alpha * xi(j) * unit(n, i) + beta * (phi(j, i) * xi - xi(j) * phi.col(i));
      if (i == j) rhs += alpha * xi;
      record_vector(rep.residuals, "trans-Sasakian (nabla_X phi)Y", m.col(j) - rhs, i * n + j);
    }
  }
  rep.holds = rep.residuals.empty();
  if (!rep.holds) return rep;

  auto& bad = rep.violated_consequences;
  Mat<Expr> nabla_xi_phi = Mat<Expr>::Constant(n, n, Expr(0));
  Vec<Expr> nabla_xi_xi = Vec<Expr>::Constant(n, Expr(0));
  for (int i = 0; i < n; ++i) {
    if (xi(i).is_zero()) continue;
    nabla_xi_phi += xi(i) * s.nabla_phi(i);
    nabla_xi_xi += xi(i) * s.nabla_xi(i);
  }
  record_matrix(bad, "nabla_xi phi = 0", nabla_xi_phi);
  record_vector(bad, "nabla_xi xi = 0", nabla_xi_xi);
  for (int i = 0; i < n; ++i) {
    const Vec<Expr> formula = -alpha * phi.col(i) + beta * (unit(n, i) - xi(i) * xi);
    record_vector(bad, "nabla_X xi = -alpha phi X + beta (X - eta(X) xi)", s.nabla_xi(i) - formula, i);
  }
  record_matrix(bad, "h = 0", s.h());
  if (s.is_contact_metric(convention)) {
    record(bad, "contact metric trans-Sasakian has alpha = 1", {}, alpha - Expr(1));
    record(bad, "contact metric trans-Sasakian has beta = 0", {}, beta);
  }
  return rep;
}

}  // namespace kmsf
