#include "mabeam/conic/program.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mabeam::conic {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

const char* kind_name(ConeKind k) {
  switch (k) {
    case ConeKind::kZero: return "zero";
    case ConeKind::kNonNeg: return "nonneg";
    case ConeKind::kSoc: return "soc";
    case ConeKind::kPsd: return "psd";
  }
  return "?";
}
}  // namespace

MatXd svec_to_mat(const Eigen::Ref<const VecXd>& v, int order) {
  MatXd m(order, order);
  int idx = 0;
  for (int j = 0; j < order; ++j) {
    for (int i = j; i < order; ++i, ++idx) {
      const double val = (i == j) ? v[idx] : v[idx] / kSqrt2;
      m(i, j) = val;
      m(j, i) = val;
    }
  }
  return m;
}

VecXd mat_to_svec(const MatXd& m) {
  const int order = static_cast<int>(m.rows());
  VecXd v(svec_size(order));
  int idx = 0;
  for (int j = 0; j < order; ++j) {
    for (int i = j; i < order; ++i, ++idx) {
      v[idx] = (i == j) ? m(i, j) : kSqrt2 * 0.5 * (m(i, j) + m(j, i));
    }
  }
  return v;
}

void ConicProgram::dump(std::ostream& os) const {
  os << "conic-program vars " << var_count << " rows " << row_count << "\n";
  os << "objective-constant " << objective_constant << "\n";
  for (int i = 0; i < objective.size(); ++i) {
    if (objective[i] != 0.0) os << "c " << i << " " << objective[i] << "\n";
  }
  for (const auto& b : blocks) {
    os << "cone " << kind_name(b.kind) << " " << b.dim;
    if (!b.tag.empty()) os << " # " << b.tag;
    os << "\n";
  }
  for (int i = 0; i < offsets.size(); ++i) {
    if (offsets[i] != 0.0) os << "b " << i << " " << offsets[i] << "\n";
  }
  for (const auto& t : coefficients) {
    os << "a " << t.row() << " " << t.col() << " " << t.value() << "\n";
  }
}

int ProgramBuilder::add_var(double lb, double ub) {
  lower_.push_back(lb);
  upper_.push_back(ub);
  return static_cast<int>(lower_.size()) - 1;
}

std::vector<int> ProgramBuilder::add_vars(int count, double lb, double ub) {
  std::vector<int> out(count);
  for (int i = 0; i < count; ++i) out[i] = add_var(lb, ub);
  return out;
}

CxExprMat ProgramBuilder::add_hermitian(int order) {
  CxExprMat m(order, order);
  for (int i = 0; i < order; ++i) {
    m.at(i, i) = CxExpr(LinExpr::variable(add_var()));
    for (int j = i + 1; j < order; ++j) {
      const int vr = add_var();
      const int vi = add_var();
      m.at(i, j) = CxExpr(LinExpr::variable(vr), LinExpr::variable(vi));
      m.at(j, i) = m.at(i, j).conj();
    }
  }
  return m;
}

CxExprMat ProgramBuilder::add_complex(int rows, int cols) {
  CxExprMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int vr = add_var();
      const int vi = add_var();
      m.at(i, j) = CxExpr(LinExpr::variable(vr), LinExpr::variable(vi));
    }
  }
  return m;
}

void ProgramBuilder::add_objective(const LinExpr& e) { objective_ += e; }

void ProgramBuilder::add_zero(const LinExpr& e) {
  pending_.push_back({ConeKind::kZero, 1, take_tag(), {e}});
}

void ProgramBuilder::add_zero(const CxExpr& e) {
  pending_.push_back({ConeKind::kZero, 2, take_tag(), {e.re, e.im}});
}

void ProgramBuilder::add_nonneg(const LinExpr& e) {
  pending_.push_back({ConeKind::kNonNeg, 1, take_tag(), {e}});
}

void ProgramBuilder::add_soc(const std::vector<LinExpr>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("add_soc: need at least (t, u)");
  pending_.push_back({ConeKind::kSoc, static_cast<int>(rows.size()), take_tag(), rows});
}

void ProgramBuilder::add_complex_soc(const std::vector<CxExpr>& u, const LinExpr& t) {
  std::vector<LinExpr> rows;
  rows.reserve(2 * u.size() + 1);
  rows.push_back(t);
  for (const auto& e : u) {
    rows.push_back(e.re);
    rows.push_back(e.im);
  }
  pending_.push_back({ConeKind::kSoc, static_cast<int>(rows.size()), take_tag(), std::move(rows)});
}

void ProgramBuilder::add_psd_real(const std::vector<LinExpr>& entries, int order) {
  if (static_cast<int>(entries.size()) != order * order) {
    throw std::invalid_argument("add_psd_real: need order^2 row-major entries");
  }
  std::vector<LinExpr> rows;
  rows.reserve(svec_size(order));
  for (int j = 0; j < order; ++j) {
    for (int i = j; i < order; ++i) {
      LinExpr sym = entries[i * order + j] + entries[j * order + i];
      sym *= (i == j) ? 0.5 : kSqrt2 * 0.5;
      rows.push_back(std::move(sym));
    }
  }
  pending_.push_back({ConeKind::kPsd, order, take_tag(), std::move(rows)});
}

void ProgramBuilder::add_psd_hermitian(const CxExprMat& h) {
  const int sc = h.rows();
  if (h.cols() != sc) throw std::invalid_argument("add_psd_hermitian: square matrix required");
  const double tol = 1e-9;
  for (int i = 0; i < sc; ++i) {
    const LinExpr& diag_im = h.at(i, i).im;
    if (std::abs(diag_im.constant()) > tol || !diag_im.is_constant(tol)) {
      throw std::invalid_argument("add_psd_hermitian: non-real diagonal");
    }
    for (int j = i + 1; j < sc; ++j) {
      const LinExpr dre = h.at(i, j).re - h.at(j, i).re;
      const LinExpr dim = h.at(i, j).im + h.at(j, i).im;
      if (std::abs(dre.constant()) > tol || !dre.is_constant(tol) ||
          std::abs(dim.constant()) > tol || !dim.is_constant(tol)) {
        throw std::invalid_argument("add_psd_hermitian: matrix is not Hermitian");
      }
    }
  }
  // real embedding [[Re, -Im], [Im, Re]] of order 2*sc; H >= 0 iff embedding >= 0
  const int s = 2 * sc;
  auto entry = [&](int i, int j) -> LinExpr {
    const bool bi = i >= sc, bj = j >= sc;
    const int ii = bi ? i - sc : i;
    const int jj = bj ? j - sc : j;
    if (bi == bj) return h.at(ii, jj).re;
    if (bi) return h.at(ii, jj).im;  // lower-left block: +Im
    return -h.at(ii, jj).im;         // upper-right block: -Im
  };
  std::vector<LinExpr> rows;
  rows.reserve(svec_size(s));
  for (int j = 0; j < s; ++j) {
    for (int i = j; i < s; ++i) {
      LinExpr e = entry(i, j);
      if (i != j) e *= kSqrt2;
      rows.push_back(std::move(e));
    }
  }
  pending_.push_back({ConeKind::kPsd, s, take_tag(), std::move(rows)});
}

ConicProgram ProgramBuilder::build() const {
  ConicProgram p;
  p.var_count = static_cast<int>(lower_.size());
  p.objective = VecXd::Zero(p.var_count);
  for (const auto& [v, c] : objective_.terms()) p.objective[v] += c;
  p.objective_constant = objective_.constant();

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> offs;
  std::vector<ConeBlock> blocks;

  auto emit_row = [&](const LinExpr& e) {
    // row encodes (offset - A x)_row = e(x): offset = const, A(row, v) = -coef
    const int r = static_cast<int>(offs.size());
    offs.push_back(e.constant());
    for (const auto& [v, c] : e.terms()) {
      if (v >= p.var_count) throw std::logic_error("expression references unknown variable");
      trips.emplace_back(r, v, -c);
    }
  };

  int bound_rows = 0;
  for (int v = 0; v < p.var_count; ++v) {
    if (std::isfinite(lower_[v])) {
      emit_row(LinExpr::variable(v) - LinExpr(lower_[v]));
      ++bound_rows;
    }
    if (std::isfinite(upper_[v])) {
      emit_row(LinExpr(upper_[v]) - LinExpr::variable(v));
      ++bound_rows;
    }
  }
  if (bound_rows > 0) blocks.push_back({ConeKind::kNonNeg, bound_rows, "bounds"});

  for (const auto& blk : pending_) {
    for (const auto& row : blk.rows) emit_row(row);
    if ((blk.kind == ConeKind::kZero || blk.kind == ConeKind::kNonNeg) && !blocks.empty() &&
        blocks.back().kind == blk.kind && blocks.back().tag == blk.tag) {
      blocks.back().dim += blk.dim;
    } else {
      blocks.push_back({blk.kind, blk.dim, blk.tag});
    }
  }

  p.coefficients = std::move(trips);
  p.offsets = Eigen::Map<VecXd>(offs.data(), static_cast<long>(offs.size()));
  p.blocks = std::move(blocks);
  p.row_count = static_cast<int>(offs.size());
  int check = 0;
  for (const auto& b : p.blocks) check += b.row_count();
  if (check != p.row_count) throw std::logic_error("block dimensions do not sum to row count");
  return p;
}

}  // namespace mabeam::conic
