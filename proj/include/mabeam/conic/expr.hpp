#pragma once

#include <utility>
#include <vector>

#include "mabeam/types.hpp"

namespace mabeam::conic {

// Sparse affine expression over program variables: constant + sum coef * x_i.
// Terms are kept sorted by variable index and merged.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by design

  static LinExpr variable(int index, double coef = 1.0) {
    LinExpr e;
    if (coef != 0.0) e.terms_.emplace_back(index, coef);
    return e;
  }

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  bool is_constant(double tol = 0.0) const;

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double a);

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { a += b; return a; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { a -= b; return a; }
  friend LinExpr operator*(LinExpr a, double s) { a *= s; return a; }
  friend LinExpr operator*(double s, LinExpr a) { a *= s; return a; }
  friend LinExpr operator-(LinExpr a) { a *= -1.0; return a; }

 private:
  double constant_ = 0.0;
  std::vector<std::pair<int, double>> terms_;
};

// Complex affine expression: pair of real expressions.
struct CxExpr {
  LinExpr re, im;

  CxExpr() = default;
  CxExpr(LinExpr r) : re(std::move(r)) {}  // NOLINT
  CxExpr(LinExpr r, LinExpr i) : re(std::move(r)), im(std::move(i)) {}
  CxExpr(Cx c) : re(c.real()), im(c.imag()) {}  // NOLINT
  CxExpr(double c) : re(c) {}                   // NOLINT

  CxExpr conj() const { return {re, -im}; }

  CxExpr& operator+=(const CxExpr& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  CxExpr& operator-=(const CxExpr& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend CxExpr operator+(CxExpr a, const CxExpr& b) { a += b; return a; }
  friend CxExpr operator-(CxExpr a, const CxExpr& b) { a -= b; return a; }
  friend CxExpr operator*(const CxExpr& a, Cx s) {
    return {a.re * s.real() - a.im * s.imag(), a.re * s.imag() + a.im * s.real()};
  }
  friend CxExpr operator*(Cx s, const CxExpr& a) { return a * s; }
  friend CxExpr operator-(CxExpr a) { return {-a.re, -a.im}; }
};

// Dense matrix of complex affine expressions.
class CxExprMat {
 public:
  CxExprMat() = default;
  CxExprMat(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CxExprMat constant(const MatXcd& m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  CxExpr& at(int r, int c) { return data_[r * cols_ + c]; }
  const CxExpr& at(int r, int c) const { return data_[r * cols_ + c]; }

  CxExprMat adjoint() const;
  CxExprMat scaled(Cx factor) const;
  CxExprMat operator+(const CxExprMat& o) const;
  CxExprMat operator-(const CxExprMat& o) const;

  // products with constant matrices (affinity preserved)
  friend CxExprMat operator*(const MatXcd& a, const CxExprMat& x);
  friend CxExprMat operator*(const CxExprMat& x, const MatXcd& a);

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<CxExpr> data_;
};

// value of an expression at a point
double evaluate(const LinExpr& e, const VecXd& x);
Cx evaluate(const CxExpr& e, const VecXd& x);

}  // namespace mabeam::conic
