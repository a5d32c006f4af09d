#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "kmsf/errors.hpp"
#include "kmsf/expr.hpp"
#include "kmsf/rational.hpp"

namespace kmsf {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Dense rank-3 array T(i,j,k), all indices in [0,n).
template <class S>
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(Vec<S>::Constant(n * n * n, S(0))) {}

  int dim() const { return n_; }
  S& operator()(int i, int j, int k) { return data_(index(i, j, k)); }
  const S& operator()(int i, int j, int k) const { return data_(index(i, j, k)); }

  Vec<S>& flat() { return data_; }
  const Vec<S>& flat() const { return data_; }

 private:
  Eigen::Index index(int i, int j, int k) const { return (Eigen::Index(i) * n_ + j) * n_ + k; }
  int n_ = 0;
  Vec<S> data_;
};

/// Dense rank-4 array T(a,b,c,d). Arithmetic goes through flat() so Eigen
/// expressions apply directly.
template <class S>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(Vec<S>::Constant(Eigen::Index(n) * n * n * n, S(0))) {}
  Tensor4(int n, Vec<S> flat) : n_(n), data_(std::move(flat)) {}

  int dim() const { return n_; }
  S& operator()(int a, int b, int c, int d) { return data_(index(a, b, c, d)); }
  const S& operator()(int a, int b, int c, int d) const { return data_(index(a, b, c, d)); }

  Vec<S>& flat() { return data_; }
  const Vec<S>& flat() const { return data_; }

  Tensor4& operator+=(const Tensor4& o) {
    data_ += o.data_;
    return *this;
  }
  Tensor4& operator-=(const Tensor4& o) {
    data_ -= o.data_;
    return *this;
  }
  friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
  friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
  friend Tensor4 operator*(const S& s, const Tensor4& t) { return Tensor4(t.n_, (t.data_ * s).eval()); }

  bool is_zero() const {
    for (Eigen::Index i = 0; i < data_.size(); ++i)
      if (!kmsf::is_zero(data_(i))) return false;
    return true;
  }

 private:
  Eigen::Index index(int a, int b, int c, int d) const {
    return ((Eigen::Index(a) * n_ + b) * n_ + c) * n_ + d;
  }
  int n_ = 0;
  Vec<S> data_;
};

/// Reduced row echelon form with the pivot column of each nonzero row.
template <class S>
struct Rref {
  Mat<S> matrix;
  std::vector<int> pivots;
  int rank() const { return static_cast<int>(pivots.size()); }
};

template <class S>
Rref<S> rref(Mat<S> m) {
  Rref<S> out;
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int p = row;
    while (p < m.rows() && is_zero(m(p, col))) ++p;
    if (p == m.rows()) continue;
    if (p != row) m.row(p).swap(m.row(row));
    const S inv = S(1) / m(row, col);
    for (int j = col; j < m.cols(); ++j) m(row, j) = m(row, j) * inv;
    for (int r = 0; r < m.rows(); ++r) {
      if (r == row || is_zero(m(r, col))) continue;
      const S f = m(r, col);
      for (int j = col; j < m.cols(); ++j) {
        if (!is_zero(m(row, j))) m(r, j) = m(r, j) - f * m(row, j);
      }
    }
    out.pivots.push_back(col);
    ++row;
  }
  out.matrix = std::move(m);
  return out;
}

/// Null-space basis as columns, one per free variable (that variable set to 1).
template <class S>
Mat<S> nullspace(const Mat<S>& a) {
  const Rref<S> r = rref<S>(a);
  std::vector<bool> is_pivot(a.cols(), false);
  for (int p : r.pivots) is_pivot[p] = true;
  std::vector<int> free;
  for (int j = 0; j < a.cols(); ++j)
    if (!is_pivot[j]) free.push_back(j);
  Mat<S> basis = Mat<S>::Constant(a.cols(), static_cast<Eigen::Index>(free.size()), S(0));
  for (std::size_t f = 0; f < free.size(); ++f) {
    basis(free[f], f) = S(1);
    for (std::size_t i = 0; i < r.pivots.size(); ++i) basis(r.pivots[i], f) = -r.matrix(i, free[f]);
  }
  return basis;
}

template <class S>
int rank(const Mat<S>& a) {
  return rref<S>(a).rank();
}

/// A particular solution of a x = b (free variables zero); nullopt if the
/// system is inconsistent. On failure, `bad_row` receives an equation index
/// that cannot be satisfied.
template <class S>
std::optional<Vec<S>> solve(const Mat<S>& a, const Vec<S>& b, int* bad_row = nullptr) {
  Mat<S> aug(a.rows(), a.cols() + 1);
  aug << a, b;
  const Rref<S> r = rref<S>(aug);
  if (!r.pivots.empty() && r.pivots.back() == a.cols()) {
    if (bad_row) {
      // Report the first original equation that is not a combination of
      // the coefficient rows.
      *bad_row = -1;
      for (int i = 0; i < a.rows() && *bad_row < 0; ++i) {
        Mat<S> sub(i + 1, a.cols() + 1);
        sub << a.topRows(i + 1), b.head(i + 1);
        if (rank<S>(sub) > rank<S>(Mat<S>(a.topRows(i + 1)))) *bad_row = i;
      }
    }
    return std::nullopt;
  }
  Vec<S> x = Vec<S>::Constant(a.cols(), S(0));
  for (std::size_t i = 0; i < r.pivots.size(); ++i) x(r.pivots[i]) = r.matrix(i, a.cols());
  return x;
}

/// Exact inverse by Gauss-Jordan; throws DomainError when singular.
template <class S>
Mat<S> inverse(const Mat<S>& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidArgument("inverse of a non-square matrix");
  Mat<S> aug(n, 2 * n);
  aug << a, Mat<S>::Identity(n, n);
  const Rref<S> r = rref<S>(aug);
  if (r.rank() < n || r.pivots[n - 1] != n - 1) throw DomainError("matrix is singular");
  return r.matrix.rightCols(n);
}

template <class S>
S determinant(Mat<S> m) {
  const Eigen::Index n = m.rows();
  S det(1);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index p = col;
    while (p < n && is_zero(m(p, col))) ++p;
    if (p == n) return S(0);
    if (p != col) {
      m.row(p).swap(m.row(col));
      det = -det;
    }
    det = det * m(col, col);
    const S inv = S(1) / m(col, col);
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (is_zero(m(r, col))) continue;
      const S f = m(r, col) * inv;
      for (Eigen::Index j = col; j < n; ++j) m(r, j) = m(r, j) - f * m(col, j);
    }
  }
  return det;
}

template <class S>
bool is_zero_matrix(const Mat<S>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!is_zero(m.data()[i])) return false;
  return true;
}

/// Entrywise evaluation of a symbolic matrix at a point.
inline Mat<Rational> eval(const Mat<Expr>& m, const Point& p) {
  return m.unaryExpr([&](const Expr& e) { return e.eval(p); });
}

inline Tensor4<Rational> eval(const Tensor4<Expr>& t, const Point& p) {
  return Tensor4<Rational>(t.dim(), t.flat().unaryExpr([&](const Expr& e) { return e.eval(p); }));
}

inline Mat<Expr> to_expr(const Mat<Rational>& m) {
  return m.unaryExpr([](const Rational& r) { return Expr(r); });
}

}  // namespace kmsf
