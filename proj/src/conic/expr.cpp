#include "mabeam/conic/expr.hpp"

#include <cmath>
#include <stdexcept>

namespace mabeam::conic {

bool LinExpr::is_constant(double tol) const {
  for (const auto& [v, c] : terms_) {
    if (std::abs(c) > tol) return false;
  }
  return true;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  constant_ += o.constant_;
  if (o.terms_.empty()) return *this;
  std::vector<std::pair<int, double>> merged;
  merged.reserve(terms_.size() + o.terms_.size());
  size_t i = 0, j = 0;
  while (i < terms_.size() || j < o.terms_.size()) {
    if (j >= o.terms_.size() || (i < terms_.size() && terms_[i].first < o.terms_[j].first)) {
      merged.push_back(terms_[i++]);
    } else if (i >= terms_.size() || o.terms_[j].first < terms_[i].first) {
      merged.push_back(o.terms_[j++]);
    } else {
      const double c = terms_[i].second + o.terms_[j].second;
      if (c != 0.0) merged.emplace_back(terms_[i].first, c);
      ++i;
      ++j;
    }
  }
  terms_ = std::move(merged);
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) { return *this += (LinExpr(o) *= -1.0); }

LinExpr& LinExpr::operator*=(double a) {
  constant_ *= a;
  if (a == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [v, c] : terms_) c *= a;
  return *this;
}

CxExprMat CxExprMat::constant(const MatXcd& m) {
  CxExprMat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out.at(r, c) = CxExpr(m(r, c));
  return out;
}

CxExprMat CxExprMat::adjoint() const {
  CxExprMat out(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out.at(c, r) = at(r, c).conj();
  return out;
}

CxExprMat CxExprMat::scaled(Cx factor) const {
  CxExprMat out(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out.at(r, c) = at(r, c) * factor;
  return out;
}

CxExprMat CxExprMat::operator+(const CxExprMat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("CxExprMat: shape mismatch");
  CxExprMat out(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out.at(r, c) = at(r, c) + o.at(r, c);
  return out;
}

CxExprMat CxExprMat::operator-(const CxExprMat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("CxExprMat: shape mismatch");
  CxExprMat out(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out.at(r, c) = at(r, c) - o.at(r, c);
  return out;
}

CxExprMat operator*(const MatXcd& a, const CxExprMat& x) {
  if (a.cols() != x.rows()) throw std::invalid_argument("CxExprMat: product shape mismatch");
  CxExprMat out(static_cast<int>(a.rows()), x.cols());
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      CxExpr acc;
      for (int t = 0; t < x.rows(); ++t) {
        if (a(r, t) != Cx(0, 0)) acc += a(r, t) * x.at(t, c);
      }
      out.at(r, c) = std::move(acc);
    }
  }
  return out;
}

CxExprMat operator*(const CxExprMat& x, const MatXcd& a) {
  if (x.cols() != a.rows()) throw std::invalid_argument("CxExprMat: product shape mismatch");
  CxExprMat out(x.rows(), static_cast<int>(a.cols()));
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      CxExpr acc;
      for (int t = 0; t < x.cols(); ++t) {
        if (a(t, c) != Cx(0, 0)) acc += x.at(r, t) * a(t, c);
      }
      out.at(r, c) = std::move(acc);
    }
  }
  return out;
}

double evaluate(const LinExpr& e, const VecXd& x) {
  double v = e.constant();
  for (const auto& [idx, c] : e.terms()) v += c * x[idx];
  return v;
}

Cx evaluate(const CxExpr& e, const VecXd& x) { return {evaluate(e.re, x), evaluate(e.im, x)}; }

}  // namespace mabeam::conic
