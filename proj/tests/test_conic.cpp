#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mabeam/conic/program.hpp"
#include "mabeam/conic/solver.hpp"
#include "mabeam/rng.hpp"

using namespace mabeam;
using namespace mabeam::conic;

namespace {

struct Micro {
  const char* name;
  ConicProgram program;
  double optimum;         // analytic optimal value
  std::vector<double> x;  // analytic minimizer (empty if not unique/needed)
};

// The analytic micro-problem library: every cone type, equality handling,
// bounds, complex embeddings, infeasibility certificates.
std::vector<Micro> micro_library() {
  std::vector<Micro> lib;

  {  // 1: 1-d LP with bound
    ProgramBuilder b;
    int xv = b.add_var(1.0, kInf);
    b.add_objective(LinExpr::variable(xv));
    lib.push_back({"lp-bound", b.build(), 1.0, {1.0}});
  }
  {  // 2: 2-d LP, two inequalities
    ProgramBuilder b;
    auto v = b.add_vars(2, 0.0, kInf);
    b.add_nonneg(LinExpr::variable(v[0]) + 2.0 * LinExpr::variable(v[1]) - 3.0);
    b.add_nonneg(2.0 * LinExpr::variable(v[0]) + LinExpr::variable(v[1]) - 3.0);
    b.add_objective(LinExpr::variable(v[0]) + LinExpr::variable(v[1]));
    lib.push_back({"lp-2d", b.build(), 2.0, {1.0, 1.0}});
  }
  {  // 3: LP with equality
    ProgramBuilder b;
    auto v = b.add_vars(2, 0.0, kInf);
    b.add_zero(LinExpr::variable(v[0]) + LinExpr::variable(v[1]) - 1.0);
    b.add_objective(LinExpr::variable(v[0]) + 2.0 * LinExpr::variable(v[1]));
    lib.push_back({"lp-eq", b.build(), 1.0, {1.0, 0.0}});
  }
  {  // 4: SOC norm bound: min t, ||(3,4)|| <= t
    ProgramBuilder b;
    int t = b.add_var();
    b.add_soc({LinExpr::variable(t), LinExpr(3.0), LinExpr(4.0)});
    b.add_objective(LinExpr::variable(t));
    lib.push_back({"soc-345", b.build(), 5.0, {5.0}});
  }
  {  // 5: linear objective over a shifted ball
    ProgramBuilder b;
    auto v = b.add_vars(2);
    b.add_soc({LinExpr(5.0), LinExpr::variable(v[0]) - 3.0, LinExpr::variable(v[1]) - 4.0});
    b.add_objective(LinExpr::variable(v[0]) + LinExpr::variable(v[1]));
    const double s = 5.0 / std::sqrt(2.0);
    lib.push_back({"soc-ball", b.build(), 7.0 - 5.0 * std::sqrt(2.0), {3.0 - s, 4.0 - s}});
  }
  {  // 6: quadratic epigraph: t >= u^2 at u = 1 via soc
    ProgramBuilder b;
    int t = b.add_var();
    b.add_soc({LinExpr::variable(t) + 1.0, 2.0 * LinExpr(1.0), LinExpr::variable(t) - 1.0});
    b.add_objective(LinExpr::variable(t));
    lib.push_back({"soc-epigraph", b.build(), 1.0, {1.0}});
  }
  {  // 7: psd boundary: min t, [[t,1],[1,t]] >= 0
    ProgramBuilder b;
    int t = b.add_var();
    std::vector<LinExpr> e = {LinExpr::variable(t), LinExpr(1.0), LinExpr(1.0),
                              LinExpr::variable(t)};
    b.add_psd_real(e, 2);
    b.add_objective(LinExpr::variable(t));
    lib.push_back({"psd-2x2", b.build(), 1.0, {1.0}});
  }
  {  // 8: lambda_max as sdp: min t, tI - A >= 0, A = [[2,1],[1,2]]
    ProgramBuilder b;
    int t = b.add_var();
    std::vector<LinExpr> e = {LinExpr::variable(t) - 2.0, LinExpr(-1.0), LinExpr(-1.0),
                              LinExpr::variable(t) - 2.0};
    b.add_psd_real(e, 2);
    b.add_objective(LinExpr::variable(t));
    lib.push_back({"psd-lmax", b.build(), 3.0, {3.0}});
  }
  {  // 9: min tr X s.t. X >= C, C = diag(1,2): optimum tr C
    ProgramBuilder b;
    auto v = b.add_vars(3);  // x11, x22, x12
    std::vector<LinExpr> e = {LinExpr::variable(v[0]) - 1.0, LinExpr::variable(v[2]),
                              LinExpr::variable(v[2]), LinExpr::variable(v[1]) - 2.0};
    b.add_psd_real(e, 2);
    b.add_objective(LinExpr::variable(v[0]) + LinExpr::variable(v[1]));
    lib.push_back({"psd-dominate", b.build(), 3.0, {1.0, 2.0, 0.0}});
  }
  {  // 10: hermitian embedding: min t, tI - H >= 0, H = [[0, i],[-i, 0]] (eigs +-1)
    ProgramBuilder b;
    int t = b.add_var();
    CxExprMat h(2, 2);
    h.at(0, 0) = CxExpr(LinExpr::variable(t));
    h.at(1, 1) = CxExpr(LinExpr::variable(t));
    h.at(0, 1) = CxExpr(Cx(0.0, -1.0));
    h.at(1, 0) = CxExpr(Cx(0.0, 1.0));
    b.add_psd_hermitian(h);
    b.add_objective(LinExpr::variable(t));
    lib.push_back({"psd-hermitian", b.build(), 1.0, {1.0}});
  }
  {  // 11: complex soc: |3+4i| <= t
    ProgramBuilder b;
    int t = b.add_var();
    b.add_complex_soc({CxExpr(Cx(3.0, 4.0))}, LinExpr::variable(t));
    b.add_objective(LinExpr::variable(t));
    lib.push_back({"soc-complex", b.build(), 5.0, {5.0}});
  }
  {  // 12: mixed lp+soc+psd: max of three lower bounds on t
    ProgramBuilder b;
    int t = b.add_var();
    b.add_nonneg(LinExpr::variable(t) - 1.5);
    b.add_soc({LinExpr::variable(t), LinExpr(1.0), LinExpr(1.0)});  // t >= sqrt(2)
    std::vector<LinExpr> e = {LinExpr::variable(t), LinExpr(2.0), LinExpr(2.0),
                              LinExpr::variable(t)};
    b.add_psd_real(e, 2);  // t >= 2
    b.add_objective(LinExpr::variable(t));
    lib.push_back({"mixed", b.build(), 2.0, {2.0}});
  }
  {  // 13: equality + soc
    ProgramBuilder b;
    auto v = b.add_vars(2);
    b.add_zero(LinExpr::variable(v[0]) - 2.0);
    b.add_soc({LinExpr::variable(v[1]), LinExpr::variable(v[0])});
    b.add_objective(LinExpr::variable(v[1]));
    lib.push_back({"eq-soc", b.build(), 2.0, {2.0, 2.0}});
  }
  {  // 14: objective constant and scaling
    ProgramBuilder b;
    int xv = b.add_var(0.0, 10.0);
    b.add_nonneg(LinExpr::variable(xv) - 4.0);
    b.add_objective(1000.0 * LinExpr::variable(xv) + LinExpr(7.0));
    lib.push_back({"lp-scaled", b.build(), 4007.0, {4.0}});
  }
  return lib;
}

}  // namespace

TEST_CASE("micro-problem regression library") {
  auto lib = micro_library();
  CHECK(lib.size() >= 12);
  for (auto& mp : lib) {
    CAPTURE(mp.name);
    auto r = solve(mp.program);
    CHECK(r.status == SolveStatus::kOptimal);
    CHECK(std::abs(r.objective - mp.optimum) < 1e-6 * std::max(1.0, std::abs(mp.optimum)));
    if (!mp.x.empty()) {
      for (size_t i = 0; i < mp.x.size(); ++i) {
        CHECK(std::abs(r.x[(int)i] - mp.x[i]) < 2e-5 * std::max(1.0, std::abs(mp.x[i])));
      }
    }
    // complementary slackness gap at optimum
    CHECK(r.gap <= 1e-6);
  }
}

TEST_CASE("determinism across runs") {
  auto lib = micro_library();
  for (auto& mp : lib) {
    auto r1 = solve(mp.program);
    auto r2 = solve(mp.program);
    CHECK(r1.status == r2.status);
    CHECK(std::abs(r1.objective - r2.objective) <= 1e-9 * std::max(1.0, std::abs(r1.objective)));
  }
}

TEST_CASE("primal infeasibility certificate") {
  ProgramBuilder b;
  int xv = b.add_var(1.0, kInf);
  b.add_nonneg(-LinExpr::variable(xv));  // x <= 0 contradicts x >= 1
  b.add_objective(LinExpr::variable(xv));
  auto r = solve(b.build());
  CHECK(r.status == SolveStatus::kPrimalInfeasible);
}

TEST_CASE("dual infeasibility certificate (unbounded)") {
  ProgramBuilder b;
  int xv = b.add_var(0.0, kInf);
  b.add_objective(-1.0 * LinExpr::variable(xv));
  auto r = solve(b.build());
  CHECK(r.status == SolveStatus::kDualInfeasible);
}

TEST_CASE("infeasible psd system") {
  // [[x, 2],[2, x]] >= 0 and x <= 1: impossible (needs x >= 2)
  ProgramBuilder b;
  int xv = b.add_var(-kInf, 1.0);
  std::vector<LinExpr> e = {LinExpr::variable(xv), LinExpr(2.0), LinExpr(2.0),
                            LinExpr::variable(xv)};
  b.add_psd_real(e, 2);
  b.add_objective(LinExpr::variable(xv));
  auto r = solve(b.build());
  CHECK(r.status == SolveStatus::kPrimalInfeasible);
}

TEST_CASE("hermitian embedding eigenvalue duplication") {
  // random hermitian H: min-eig via sdp equals analytic min-eig
  Rng rng(7);
  const int d = 3;
  MatXcd h(d, d);
  for (int i = 0; i < d; ++i) {
    h(i, i) = Cx(rng.gaussian(), 0.0);
    for (int j = i + 1; j < d; ++j) {
      h(i, j) = Cx(rng.gaussian(), rng.gaussian());
      h(j, i) = std::conj(h(i, j));
    }
  }
  Eigen::SelfAdjointEigenSolver<MatXcd> es(h);
  const double lmin = es.eigenvalues().minCoeff();

  // max t s.t. H - tI >= 0  <=>  min -t
  ProgramBuilder b;
  int t = b.add_var();
  CxExprMat hm = CxExprMat::constant(h);
  for (int i = 0; i < d; ++i) hm.at(i, i) -= CxExpr(LinExpr::variable(t));
  b.add_psd_hermitian(hm);
  b.add_objective(-1.0 * LinExpr::variable(t));
  auto r = solve(b.build());
  CHECK(r.status == SolveStatus::kOptimal);
  CHECK(r.x[t] == doctest::Approx(lmin).epsilon(1e-6));
}

TEST_CASE("non-hermitian input rejected") {
  ProgramBuilder b;
  CxExprMat h(2, 2);
  h.at(0, 0) = CxExpr(1.0);
  h.at(1, 1) = CxExpr(1.0);
  h.at(0, 1) = CxExpr(Cx(0.0, 1.0));
  h.at(1, 0) = CxExpr(Cx(0.0, 1.0));  // should be -i
  CHECK_THROWS_AS(b.add_psd_hermitian(h), std::invalid_argument);
}

TEST_CASE("complex soc norm matches modulus") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Cx> u(3);
    double nsq = 0.0;
    for (auto& c : u) {
      c = Cx(rng.gaussian(), rng.gaussian());
      nsq += std::norm(c);
    }
    ProgramBuilder b;
    int t = b.add_var();
    std::vector<CxExpr> ue;
    for (auto& c : u) ue.emplace_back(c);
    b.add_complex_soc(ue, LinExpr::variable(t));
    b.add_objective(LinExpr::variable(t));
    auto r = solve(b.build());
    CHECK(r.status == SolveStatus::kOptimal);
    CHECK(r.objective == doctest::Approx(std::sqrt(nsq)).epsilon(1e-8));
  }
}

TEST_CASE("equilibration invariance") {
  // badly scaled lp: 1e6 x + 1e-6 y with coupling
  ProgramBuilder b;
  auto v = b.add_vars(2, 0.0, kInf);
  b.add_nonneg(1e6 * LinExpr::variable(v[0]) + 1e-6 * LinExpr::variable(v[1]) - 2.0);
  b.add_objective(1e3 * LinExpr::variable(v[0]) + LinExpr::variable(v[1]));
  auto p = b.build();
  SolverOptions on, off;
  off.equilibrate = false;
  auto r1 = solve(p, on);
  auto r2 = solve(p, off);
  CHECK(r1.status == SolveStatus::kOptimal);
  // optimum: either x = 2e-6 (cost 2e-3) or y = 2e6 (cost 2e6): x route wins
  CHECK(r1.objective == doctest::Approx(2e-3).epsilon(1e-6));
  if (r2.status == SolveStatus::kOptimal) {
    CHECK(r1.objective == doctest::Approx(r2.objective).epsilon(1e-5));
  }
}

TEST_CASE("program dump round trip smoke") {
  ProgramBuilder b;
  int t = b.add_var();
  b.add_soc({LinExpr::variable(t), LinExpr(3.0), LinExpr(4.0)});
  b.add_objective(LinExpr::variable(t));
  auto p = b.build();
  std::ostringstream os;
  p.dump(os);
  const std::string text = os.str();
  CHECK(text.find("cone soc 3") != std::string::npos);
  CHECK(text.find("conic-program vars 1") != std::string::npos);
}

TEST_CASE("svec helpers") {
  Rng rng(3);
  MatXd m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rng.gaussian();
  MatXd sym = 0.5 * (m + m.transpose());
  const VecXd v = mat_to_svec(sym);
  CHECK((svec_to_mat(v, 4) - sym).cwiseAbs().maxCoeff() < 1e-14);
  // inner product preserved
  MatXd m2 = MatXd::Random(4, 4);
  MatXd sym2 = 0.5 * (m2 + m2.transpose());
  CHECK(v.dot(mat_to_svec(sym2)) == doctest::Approx((sym * sym2).trace()).epsilon(1e-12));
}
