#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "mabeam/conic/expr.hpp"
#include "mabeam/types.hpp"

namespace mabeam::conic {

enum class ConeKind { kZero, kNonNeg, kSoc, kPsd };

// One cone block of constraint rows. For zero/nonneg/soc cones `dim` is the
// row count; for psd blocks `dim` is the matrix order s and the block spans
// s(s+1)/2 scaled-triangle rows.
struct ConeBlock {
  ConeKind kind;
  int dim;
  std::string tag;

  int row_count() const { return kind == ConeKind::kPsd ? dim * (dim + 1) / 2 : dim; }
};

// Real conic program in the form
//   minimize    c'x + c0
//   subject to  offsets - A x  in  K1 x K2 x ...
struct ConicProgram {
  int var_count = 0;
  VecXd objective;  // c
  double objective_constant = 0.0;
  std::vector<Eigen::Triplet<double>> coefficients;  // of A
  VecXd offsets;
  std::vector<ConeBlock> blocks;
  int row_count = 0;

  // Sparse text dump (triplets + cone headers) for external cross-checking.
  void dump(std::ostream& os) const;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// scaled lower-triangle (column-major) index of entry (i, j), i >= j
inline int svec_index(int order, int i, int j) {
  return j * order - j * (j - 1) / 2 + (i - j);
}
inline int svec_size(int order) { return order * (order + 1) / 2; }

MatXd svec_to_mat(const Eigen::Ref<const VecXd>& v, int order);
VecXd mat_to_svec(const MatXd& m);

class ProgramBuilder {
 public:
  int add_var(double lb = -kInf, double ub = kInf);
  std::vector<int> add_vars(int count, double lb = -kInf, double ub = kInf);

  // Hermitian s x s matrix backed by s^2 real variables (upper triangle only).
  CxExprMat add_hermitian(int order);
  // General complex matrix backed by 2 r c real variables.
  CxExprMat add_complex(int rows, int cols);

  void add_objective(const LinExpr& e);

  // tag applied to the next emitted block
  void tag(std::string t) { next_tag_ = std::move(t); }

  void add_zero(const LinExpr& e);                  // e == 0
  void add_zero(const CxExpr& e);                   // both parts == 0
  void add_nonneg(const LinExpr& e);                // e >= 0
  void add_soc(const std::vector<LinExpr>& rows);   // rows[0] >= ||rows[1:]||

  // ||u|| <= t for a complex affine vector u: stacks (Re u, Im u) under t.
  void add_complex_soc(const std::vector<CxExpr>& u, const LinExpr& t);

  // real symmetric affine matrix (row-major order x order entries) >= 0
  void add_psd_real(const std::vector<LinExpr>& entries, int order);

  // Hermitian affine matrix H >= 0 via the real embedding
  // [[Re H, -Im H], [Im H, Re H]]; rejects non-Hermitian input.
  void add_psd_hermitian(const CxExprMat& h);

  ConicProgram build() const;

  int var_count() const { return static_cast<int>(lower_.size()); }

 private:
  struct PendingBlock {
    ConeKind kind;
    int dim;
    std::string tag;
    std::vector<LinExpr> rows;
  };

  std::string take_tag() {
    std::string t = std::move(next_tag_);
    next_tag_.clear();
    return t;
  }

  std::vector<double> lower_, upper_;
  LinExpr objective_;
  std::vector<PendingBlock> pending_;
  std::string next_tag_;
};

}  // namespace mabeam::conic
