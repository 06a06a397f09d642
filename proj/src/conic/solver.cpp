#include "mabeam/conic/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mabeam::conic {

namespace {

constexpr double kInfVal = std::numeric_limits<double>::infinity();

struct ConeSeg {
  ConeKind kind;
  int dim;     // rows for nonneg/soc, matrix order for psd
  int offset;  // first row within G
  int rows;    // row span within G
};

// Nesterov-Todd scaling state for one cone segment.
struct Scaling {
  // nonneg
  VecXd w;
  // soc: W = eta (2 wbar wbar' - J)
  double eta = 1.0;
  VecXd wbar;
  // psd: W u = svec(R' U R); Wnt = R R'
  MatXd r, rinv, wnt, wntinv;
  MatXd ls, lz;  // cholesky factors of mat(s), mat(z) for step bounds
  // scaled point lambda = W^-T s = W z
  VecXd lambda;
};

VecXd soc_j(const Eigen::Ref<const VecXd>& u) {
  VecXd v = -u;
  v[0] = u[0];
  return v;
}

VecXd cone_identity(const ConeSeg& c) {
  if (c.kind == ConeKind::kNonNeg) return VecXd::Ones(c.rows);
  if (c.kind == ConeKind::kSoc) {
    VecXd e = VecXd::Zero(c.rows);
    e[0] = 1.0;
    return e;
  }
  VecXd e = VecXd::Zero(c.rows);
  int idx = 0;
  for (int j = 0; j < c.dim; ++j) {
    e[idx] = 1.0;
    idx += c.dim - j;
  }
  return e;
}

double cone_margin(const ConeSeg& c, const Eigen::Ref<const VecXd>& u) {
  if (c.kind == ConeKind::kNonNeg) return u.minCoeff();
  if (c.kind == ConeKind::kSoc) return u[0] - u.tail(c.rows - 1).norm();
  Eigen::SelfAdjointEigenSolver<MatXd> es(svec_to_mat(u, c.dim), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void identity_scaling(const ConeSeg& c, Scaling& w) {
  if (c.kind == ConeKind::kNonNeg) {
    w.w = VecXd::Ones(c.rows);
    w.lambda = VecXd::Ones(c.rows);
  } else if (c.kind == ConeKind::kSoc) {
    w.eta = 1.0;
    w.wbar = cone_identity(c);
    w.lambda = cone_identity(c);
  } else {
    w.rinv = MatXd::Identity(c.dim, c.dim);
    w.r = w.rinv;
    w.wnt = w.rinv;
    w.wntinv = w.rinv;
    w.ls = w.rinv;
    w.lz = w.rinv;
    w.lambda = cone_identity(c);
  }
}

void compute_scaling(const ConeSeg& c, const Eigen::Ref<const VecXd>& s,
                     const Eigen::Ref<const VecXd>& z, Scaling& w) {
  switch (c.kind) {
    case ConeKind::kNonNeg: {
      w.w = (s.array() / z.array()).sqrt();
      w.lambda = (s.array() * z.array()).sqrt();
      return;
    }
    case ConeKind::kSoc: {
      const int d = c.rows;
      const double sres = std::sqrt(std::max(1e-300, s[0] * s[0] - s.tail(d - 1).squaredNorm()));
      const double zres = std::sqrt(std::max(1e-300, z[0] * z[0] - z.tail(d - 1).squaredNorm()));
      const VecXd sb = s / sres;
      const VecXd zb = z / zres;
      const double gamma = std::sqrt(std::max(1e-300, (1.0 + sb.dot(zb)) / 2.0));
      w.wbar = (sb + soc_j(zb)) / (2.0 * gamma);
      w.eta = std::sqrt(sres / zres);
      const VecXd jw = soc_j(w.wbar);
      w.lambda = (2.0 * jw * (jw.dot(s)) - soc_j(s)) / w.eta;
      return;
    }
    case ConeKind::kPsd: {
      const int d = c.dim;
      MatXd sm = svec_to_mat(s, d);
      MatXd zm = svec_to_mat(z, d);
      Eigen::LLT<MatXd> slt(sm);
      if (slt.info() != Eigen::Success) {
        sm += (1e-14 * std::abs(sm.trace()) + 1e-300) * MatXd::Identity(d, d);
        slt.compute(sm);
      }
      Eigen::LLT<MatXd> zlt(zm);
      if (zlt.info() != Eigen::Success) {
        zm += (1e-14 * std::abs(zm.trace()) + 1e-300) * MatXd::Identity(d, d);
        zlt.compute(zm);
      }
      w.ls = slt.matrixL();
      w.lz = zlt.matrixL();
      Eigen::JacobiSVD<MatXd> svd(w.lz.transpose() * w.ls,
                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
      const VecXd sig = svd.singularValues();
      const VecXd sig_isqrt = sig.cwiseSqrt().cwiseInverse();
      w.r = w.ls * svd.matrixV() * sig_isqrt.asDiagonal();
      w.rinv = sig_isqrt.asDiagonal() * svd.matrixU().transpose() * w.lz.transpose();
      w.wnt = w.r * w.r.transpose();
      w.wntinv = w.rinv.transpose() * w.rinv;
      w.lambda = VecXd::Zero(c.rows);
      int idx = 0;
      for (int j = 0; j < d; ++j) {
        w.lambda[idx] = sig[j];
        idx += d - j;
      }
      return;
    }
    case ConeKind::kZero:
      return;
  }
}

enum class WMode { kW, kWt, kWinv, kWinvT };

VecXd apply_w(const ConeSeg& c, const Scaling& w, const Eigen::Ref<const VecXd>& u, WMode mode) {
  switch (c.kind) {
    case ConeKind::kNonNeg:
      if (mode == WMode::kW || mode == WMode::kWt) return w.w.cwiseProduct(u);
      return u.cwiseQuotient(w.w);
    case ConeKind::kSoc: {
      if (mode == WMode::kW || mode == WMode::kWt) {
        return w.eta * (2.0 * w.wbar * w.wbar.dot(u) - soc_j(u));
      }
      const VecXd jw = soc_j(w.wbar);
      return (2.0 * jw * jw.dot(u) - soc_j(u)) / w.eta;
    }
    case ConeKind::kPsd: {
      const MatXd um = svec_to_mat(u, c.dim);
      switch (mode) {
        case WMode::kW: return mat_to_svec(w.r.transpose() * um * w.r);
        case WMode::kWt: return mat_to_svec(w.r * um * w.r.transpose());
        case WMode::kWinv: return mat_to_svec(w.rinv.transpose() * um * w.rinv);
        case WMode::kWinvT: return mat_to_svec(w.rinv * um * w.rinv.transpose());
      }
      return u;
    }
    case ConeKind::kZero:
      return u;
  }
  return u;
}

// (W'W)^-1 u
VecXd apply_winvsq(const ConeSeg& c, const Scaling& w, const Eigen::Ref<const VecXd>& u) {
  if (c.kind == ConeKind::kNonNeg) return u.cwiseQuotient(w.w.cwiseProduct(w.w));
  if (c.kind == ConeKind::kSoc) {
    return apply_w(c, w, apply_w(c, w, u, WMode::kWinvT), WMode::kWinv);
  }
  return mat_to_svec(w.wntinv * svec_to_mat(u, c.dim) * w.wntinv);
}

// W'W u
VecXd apply_wsq(const ConeSeg& c, const Scaling& w, const Eigen::Ref<const VecXd>& u) {
  if (c.kind == ConeKind::kNonNeg) return u.cwiseProduct(w.w.cwiseProduct(w.w));
  if (c.kind == ConeKind::kSoc) {
    return apply_w(c, w, apply_w(c, w, u, WMode::kW), WMode::kWt);
  }
  return mat_to_svec(w.wnt * svec_to_mat(u, c.dim) * w.wnt);
}

VecXd jordan_prod(const ConeSeg& c, const Eigen::Ref<const VecXd>& u,
                  const Eigen::Ref<const VecXd>& v) {
  if (c.kind == ConeKind::kNonNeg) return u.cwiseProduct(v);
  if (c.kind == ConeKind::kSoc) {
    VecXd out(c.rows);
    out[0] = u.dot(v);
    out.tail(c.rows - 1) = u[0] * v.tail(c.rows - 1) + v[0] * u.tail(c.rows - 1);
    return out;
  }
  const MatXd um = svec_to_mat(u, c.dim);
  const MatXd vm = svec_to_mat(v, c.dim);
  return mat_to_svec(0.5 * (um * vm + vm * um));
}

// lambda \ v
VecXd jordan_div_lambda(const ConeSeg& c, const Scaling& w, const Eigen::Ref<const VecXd>& v) {
  if (c.kind == ConeKind::kNonNeg) return v.cwiseQuotient(w.lambda);
  if (c.kind == ConeKind::kSoc) {
    const int d = c.rows;
    const VecXd& lam = w.lambda;
    const double det = lam[0] * lam[0] - lam.tail(d - 1).squaredNorm();
    VecXd out(d);
    out[0] = (lam[0] * v[0] - lam.tail(d - 1).dot(v.tail(d - 1))) / det;
    out.tail(d - 1) = (v.tail(d - 1) - out[0] * lam.tail(d - 1)) / lam[0];
    return out;
  }
  const int d = c.dim;
  VecXd lam_diag(d);
  int idx = 0;
  for (int j = 0; j < d; ++j) {
    lam_diag[j] = w.lambda[idx];
    idx += d - j;
  }
  MatXd vm = svec_to_mat(v, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) vm(i, j) = 2.0 * vm(i, j) / (lam_diag[i] + lam_diag[j]);
  return mat_to_svec(vm);
}

// largest alpha with u + alpha du in the cone (u strictly interior); for psd
// lu is the cholesky factor of mat(u).
double max_step(const ConeSeg& c, const Eigen::Ref<const VecXd>& u,
                const Eigen::Ref<const VecXd>& du, const MatXd* lu) {
  if (c.kind == ConeKind::kNonNeg) {
    double a = kInfVal;
    for (int i = 0; i < c.rows; ++i) {
      if (du[i] < 0.0) a = std::min(a, -u[i] / du[i]);
    }
    return a;
  }
  if (c.kind == ConeKind::kSoc) {
    const int d = c.rows;
    const double a2 = du[0] * du[0] - du.tail(d - 1).squaredNorm();
    const double a1 = 2.0 * (u[0] * du[0] - u.tail(d - 1).dot(du.tail(d - 1)));
    const double a0 = u[0] * u[0] - u.tail(d - 1).squaredNorm();
    double root = kInfVal;
    if (std::abs(a2) < 1e-300) {
      if (a1 < 0.0) root = std::max(0.0, -a0 / a1);
    } else {
      const double disc = a1 * a1 - 4.0 * a2 * a0;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (a1 + (a1 >= 0 ? sq : -sq));
        double r1 = q / a2;
        double r2 = (q != 0.0) ? a0 / q : ((a2 < 0) ? kInfVal : -kInfVal);
        if (r1 > r2) std::swap(r1, r2);
        if (r1 > 0.0) root = r1;
        else if (r2 > 0.0) root = r2;
      }
    }
    double cap = kInfVal;
    if (du[0] < 0.0) cap = -u[0] / du[0];
    return std::min(root, cap);
  }
  const MatXd dm = svec_to_mat(du, c.dim);
  const MatXd tmp = lu->triangularView<Eigen::Lower>().solve(dm);
  const MatXd m = lu->triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return kInfVal;
  return -1.0 / lmin;
}

// ---------------------------------------------------------------------------

struct Compiled {
  int n = 0, p = 0, m = 0;
  VecXd c, b, h;
  std::vector<std::vector<std::pair<int, double>>> a_cols, g_cols;
  std::vector<ConeSeg> cones;
  int degree = 0;
  bool trivially_infeasible = false;
  VecXd col_scale, eq_row_scale, cone_row_scale;
  double cost_scale = 1.0;
  std::vector<std::vector<std::pair<int, double>>> g_rows;  // nonneg rows only
  struct SegCols {
    std::vector<int> vars;
    std::vector<std::vector<std::pair<int, double>>> entries;  // (local row, value)
  };
  std::vector<SegCols> seg_cols;  // for soc/psd segments
};

Compiled compile(const ConicProgram& prog, bool equilibrate) {
  Compiled cp;
  cp.n = prog.var_count;
  cp.c = prog.objective;

  std::vector<int> row_to_eq(prog.row_count, -1), row_to_g(prog.row_count, -1);
  int p = 0, m = 0, row0 = 0;
  for (const auto& blk : prog.blocks) {
    const int rc = blk.row_count();
    if (blk.kind == ConeKind::kZero) {
      for (int r = 0; r < rc; ++r) row_to_eq[row0 + r] = p + r;
      p += rc;
    } else {
      for (int r = 0; r < rc; ++r) row_to_g[row0 + r] = m + r;
      cp.cones.push_back({blk.kind, blk.kind == ConeKind::kPsd ? blk.dim : rc, m, rc});
      m += rc;
    }
    row0 += rc;
  }
  cp.p = p;
  cp.m = m;
  if (m == 0) throw std::invalid_argument("conic solve: program must contain cone rows");
  cp.b = VecXd::Zero(p);
  cp.h = VecXd::Zero(m);
  for (int r = 0; r < prog.row_count; ++r) {
    if (row_to_eq[r] >= 0) cp.b[row_to_eq[r]] = prog.offsets[r];
    else cp.h[row_to_g[r]] = prog.offsets[r];
  }
  cp.a_cols.resize(cp.n);
  cp.g_cols.resize(cp.n);
  for (const auto& t : prog.coefficients) {
    if (t.value() == 0.0) continue;
    if (row_to_eq[t.row()] >= 0) cp.a_cols[t.col()].emplace_back(row_to_eq[t.row()], t.value());
    else cp.g_cols[t.col()].emplace_back(row_to_g[t.row()], t.value());
  }
  for (auto& col : cp.a_cols) std::sort(col.begin(), col.end());
  for (auto& col : cp.g_cols) std::sort(col.begin(), col.end());
  // merge duplicates
  auto dedup = [](std::vector<std::pair<int, double>>& col) {
    size_t out = 0;
    for (size_t i = 0; i < col.size();) {
      int r = col[i].first;
      double v = 0.0;
      while (i < col.size() && col[i].first == r) v += col[i++].second;
      col[out++] = {r, v};
    }
    col.resize(out);
  };
  for (auto& col : cp.a_cols) dedup(col);
  for (auto& col : cp.g_cols) dedup(col);

  // drop equality rows with no variables; a nonzero offset there is an
  // immediate infeasibility
  {
    std::vector<int> count(std::max(1, cp.p), 0);
    for (const auto& col : cp.a_cols) {
      for (const auto& [r, v] : col) ++count[r];
    }
    std::vector<int> remap(std::max(1, cp.p), -1);
    int np = 0;
    for (int r = 0; r < cp.p; ++r) {
      if (count[r] > 0) remap[r] = np++;
      else if (std::abs(cp.b[r]) > 1e-12) cp.trivially_infeasible = true;
    }
    if (np != cp.p) {
      VecXd nb = VecXd::Zero(np);
      for (int r = 0; r < cp.p; ++r) {
        if (remap[r] >= 0) nb[remap[r]] = cp.b[r];
      }
      cp.b = nb;
      for (auto& col : cp.a_cols) {
        for (auto& [r, v] : col) r = remap[r];
      }
      cp.p = np;
    }
  }

  for (const auto& seg : cp.cones) {
    if (seg.kind == ConeKind::kNonNeg) cp.degree += seg.rows;
    else if (seg.kind == ConeKind::kSoc) cp.degree += 1;
    else cp.degree += seg.dim;
  }

  cp.col_scale = VecXd::Ones(cp.n);
  cp.eq_row_scale = VecXd::Ones(std::max(1, cp.p));
  cp.cone_row_scale = VecXd::Ones(cp.m);
  if (equilibrate) {
    std::vector<int> row_block(cp.m);
    for (size_t s = 0; s < cp.cones.size(); ++s) {
      for (int r = 0; r < cp.cones[s].rows; ++r) row_block[cp.cones[s].offset + r] = (int)s;
    }
    for (int pass = 0; pass < 10; ++pass) {
      VecXd row_max_eq = VecXd::Zero(std::max(1, cp.p));
      VecXd row_max_g = VecXd::Zero(cp.m);
      VecXd col_max = VecXd::Zero(cp.n);
      for (int j = 0; j < cp.n; ++j) {
        for (auto& [r, v] : cp.a_cols[j]) {
          const double av = std::abs(v) * cp.col_scale[j] * cp.eq_row_scale[r];
          row_max_eq[r] = std::max(row_max_eq[r], av);
          col_max[j] = std::max(col_max[j], av);
        }
        for (auto& [r, v] : cp.g_cols[j]) {
          const double av = std::abs(v) * cp.col_scale[j] * cp.cone_row_scale[r];
          row_max_g[r] = std::max(row_max_g[r], av);
          col_max[j] = std::max(col_max[j], av);
        }
      }
      std::vector<double> block_max(cp.cones.size(), 0.0);
      for (int r = 0; r < cp.m; ++r) {
        const int bidx = row_block[r];
        if (cp.cones[bidx].kind != ConeKind::kNonNeg) {
          block_max[bidx] = std::max(block_max[bidx], row_max_g[r]);
        }
      }
      for (int r = 0; r < cp.m; ++r) {
        const int bidx = row_block[r];
        const double mx =
            (cp.cones[bidx].kind != ConeKind::kNonNeg) ? block_max[bidx] : row_max_g[r];
        if (mx > 0.0) cp.cone_row_scale[r] /= std::sqrt(mx);
      }
      for (int r = 0; r < cp.p; ++r) {
        if (row_max_eq[r] > 0.0) cp.eq_row_scale[r] /= std::sqrt(row_max_eq[r]);
      }
      for (int j = 0; j < cp.n; ++j) {
        if (col_max[j] > 0.0) cp.col_scale[j] /= std::sqrt(col_max[j]);
      }
    }
    for (int j = 0; j < cp.n; ++j) {
      for (auto& [r, v] : cp.a_cols[j]) v *= cp.col_scale[j] * cp.eq_row_scale[r];
      for (auto& [r, v] : cp.g_cols[j]) v *= cp.col_scale[j] * cp.cone_row_scale[r];
      cp.c[j] *= cp.col_scale[j];
    }
    if (cp.p > 0) cp.b.array() *= cp.eq_row_scale.head(cp.p).array();
    cp.h.array() *= cp.cone_row_scale.array();
    cp.cost_scale = std::max(1.0, cp.c.lpNorm<Eigen::Infinity>());
    cp.c /= cp.cost_scale;
  }

  cp.g_rows.resize(cp.m);
  cp.seg_cols.resize(cp.cones.size());
  std::vector<int> row_seg(cp.m);
  for (size_t s = 0; s < cp.cones.size(); ++s) {
    for (int r = 0; r < cp.cones[s].rows; ++r) row_seg[cp.cones[s].offset + r] = (int)s;
  }
  std::vector<int> seen(cp.cones.size(), -1);
  for (int j = 0; j < cp.n; ++j) {
    for (auto& [r, v] : cp.g_cols[j]) {
      const int s = row_seg[r];
      const auto& seg = cp.cones[s];
      if (seg.kind == ConeKind::kNonNeg) {
        cp.g_rows[r].emplace_back(j, v);
      } else {
        auto& sc = cp.seg_cols[s];
        if (seen[s] != j) {
          seen[s] = j;
          sc.vars.push_back(j);
          sc.entries.emplace_back();
        }
        sc.entries.back().emplace_back(r - seg.offset, v);
      }
    }
  }
  return cp;
}

VecXd sp_ax(const Compiled& cp, const VecXd& x) {
  VecXd out = VecXd::Zero(cp.p);
  for (int j = 0; j < cp.n; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (const auto& [r, v] : cp.a_cols[j]) out[r] += v * xj;
  }
  return out;
}
VecXd sp_at(const Compiled& cp, const VecXd& y) {
  VecXd out = VecXd::Zero(cp.n);
  for (int j = 0; j < cp.n; ++j) {
    double acc = 0.0;
    for (const auto& [r, v] : cp.a_cols[j]) acc += v * y[r];
    out[j] = acc;
  }
  return out;
}
VecXd sp_gx(const Compiled& cp, const VecXd& x) {
  VecXd out = VecXd::Zero(cp.m);
  for (int j = 0; j < cp.n; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (const auto& [r, v] : cp.g_cols[j]) out[r] += v * xj;
  }
  return out;
}
VecXd sp_gt(const Compiled& cp, const VecXd& z) {
  VecXd out = VecXd::Zero(cp.n);
  for (int j = 0; j < cp.n; ++j) {
    double acc = 0.0;
    for (const auto& [r, v] : cp.g_cols[j]) acc += v * z[r];
    out[j] = acc;
  }
  return out;
}

struct Kkt {
  MatXd mat;
  VecXd reg;  // signed diagonal regularization actually applied
  Eigen::PartialPivLU<MatXd> lu;
  int n = 0, p = 0;

  void factor(const Compiled& cp, const std::vector<Scaling>& scal) {
    n = cp.n;
    p = cp.p;
    if (mat.rows() != n + p) mat.resize(n + p, n + p);
    mat.setZero();
    auto hblk = mat.topLeftCorner(n, n);
    for (size_t si = 0; si < cp.cones.size(); ++si) {
      const auto& seg = cp.cones[si];
      const auto& w = scal[si];
      if (seg.kind == ConeKind::kNonNeg) {
        for (int r = 0; r < seg.rows; ++r) {
          const auto& row = cp.g_rows[seg.offset + r];
          if (row.empty()) continue;
          const double d = 1.0 / (w.w[r] * w.w[r]);
          for (size_t a = 0; a < row.size(); ++a) {
            const double va = d * row[a].second;
            for (size_t bi = 0; bi < row.size(); ++bi) {
              hblk(row[a].first, row[bi].first) += va * row[bi].second;
            }
          }
        }
      } else {
        const auto& sc = cp.seg_cols[si];
        const int nb = static_cast<int>(sc.vars.size());
        if (nb == 0) continue;
        MatXd t(seg.rows, nb);
        VecXd buf = VecXd::Zero(seg.rows);
        for (int jj = 0; jj < nb; ++jj) {
          buf.setZero();
          for (const auto& [lr, v] : sc.entries[jj]) buf[lr] = v;
          t.col(jj) = apply_winvsq(seg, w, buf);
        }
        for (int jj = 0; jj < nb; ++jj) {
          const auto& col_t = t.col(jj);
          for (int ii = 0; ii <= jj; ++ii) {
            double acc = 0.0;
            for (const auto& [lr, v] : sc.entries[ii]) acc += v * col_t[lr];
            hblk(sc.vars[ii], sc.vars[jj]) += acc;
            if (ii != jj) hblk(sc.vars[jj], sc.vars[ii]) += acc;
          }
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      for (const auto& [r, v] : cp.a_cols[j]) {
        mat(n + r, j) = v;
        mat(j, n + r) = v;
      }
    }
    // relative regularization: invisible for conditioning, guards exact
    // singularity of degenerate blocks
    reg.resize(n + p);
    const double hmax = std::max(1e-300, hblk.diagonal().cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
      reg[i] = 1e-14 * std::abs(hblk(i, i)) + 1e-30;
      mat(i, i) += reg[i];
    }
    const double preg = 1e-14 * hmax + 1e-30;
    for (int i = 0; i < p; ++i) {
      reg[n + i] = -preg;
      mat(n + i, n + i) = -preg;
    }
    lu.compute(mat);
  }

  void solve_reduced(const VecXd& r1, const VecXd& r2, VecXd& dx, VecXd& dy) const {
    VecXd rhs(n + p);
    rhs.head(n) = r1;
    rhs.tail(p) = r2;
    VecXd sol = lu.solve(rhs);
    const double rhs_norm = std::max(1e-300, rhs.norm());
    for (int pass = 0; pass < 3; ++pass) {
      VecXd resid = rhs - mat * sol + reg.cwiseProduct(sol);
      if (resid.norm() <= 1e-14 * rhs_norm) break;
      sol += lu.solve(resid);
    }
    dx = sol.head(n);
    dy = sol.tail(p);
  }
};

struct Directions {
  VecXd x, y, z, s;
  double tau = 0.0, kappa = 0.0;
};

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kPrimalInfeasible: return "primal_infeasible";
    case SolveStatus::kDualInfeasible: return "dual_infeasible";
    case SolveStatus::kMaxIter: return "max_iter";
  }
  return "unknown";
}

SolveResult solve(const ConicProgram& prog, const SolverOptions& opt) {
  Compiled cp = compile(prog, opt.equilibrate);
  if (cp.trivially_infeasible) {
    SolveResult res;
    res.status = SolveStatus::kPrimalInfeasible;
    res.objective = kInfVal;
    return res;
  }
  const int n = cp.n, p = cp.p, m = cp.m;
  const int nseg = static_cast<int>(cp.cones.size());

  std::vector<Scaling> scal(nseg);
  for (int s = 0; s < nseg; ++s) identity_scaling(cp.cones[s], scal[s]);

  Kkt kkt;
  kkt.factor(cp, scal);

  auto winvsq_full = [&](const VecXd& u) {
    VecXd out(m);
    for (int s = 0; s < nseg; ++s) {
      const auto& seg = cp.cones[s];
      out.segment(seg.offset, seg.rows) =
          apply_winvsq(seg, scal[s], u.segment(seg.offset, seg.rows));
    }
    return out;
  };
  auto apply_w_full = [&](const VecXd& u, WMode mode) {
    VecXd out(m);
    for (int s = 0; s < nseg; ++s) {
      const auto& seg = cp.cones[s];
      out.segment(seg.offset, seg.rows) =
          apply_w(seg, scal[s], u.segment(seg.offset, seg.rows), mode);
    }
    return out;
  };
  // Solve the 3x3 KKT [0 A' G'; A 0 0; G 0 -W'W] (ux,uy,uz) = (bx,by,bz) by
  // eliminating the scaled dual zt = W uz; refinement runs in the scaled
  // space where all quantities stay well-sized near convergence.
  auto solve3 = [&](const VecXd& bx, const VecXd& by, const VecXd& bz, VecXd& ux, VecXd& uy,
                    VecXd& uz) {
    const VecXd bzs = apply_w_full(bz, WMode::kWinvT);
    auto gts = [&](const VecXd& v) { return sp_gt(cp, apply_w_full(v, WMode::kWinv)); };
    VecXd r1 = bx + gts(bzs);
    kkt.solve_reduced(r1, by, ux, uy);
    VecXd zt = apply_w_full(sp_gx(cp, ux), WMode::kWinvT) - bzs;
    const double scale =
        std::max({1.0, bx.lpNorm<Eigen::Infinity>(), by.size() ? by.lpNorm<Eigen::Infinity>() : 0.0,
                  bzs.lpNorm<Eigen::Infinity>()});
    VecXd dx(n), dy(p);
    double prev_err = kInfVal;
    for (int pass = 0; pass < 10; ++pass) {
      const VecXd e1 = bx - (sp_at(cp, uy) + gts(zt));
      const VecXd e2 = by - sp_ax(cp, ux);
      const VecXd e3 = bzs - (apply_w_full(sp_gx(cp, ux), WMode::kWinvT) - zt);
      const double err = std::max({e1.lpNorm<Eigen::Infinity>(),
                                   p ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                   e3.lpNorm<Eigen::Infinity>()});
      if (err <= 1e-13 * scale || err >= 0.5 * prev_err) break;
      prev_err = err;
      r1 = e1 + gts(e3);
      kkt.solve_reduced(r1, e2, dx, dy);
      zt += apply_w_full(sp_gx(cp, dx), WMode::kWinvT) - e3;
      ux += dx;
      uy += dy;
    }
    uz = apply_w_full(zt, WMode::kWinv);
  };

  VecXd x = VecXd::Zero(n), y = VecXd::Zero(p), z = VecXd::Zero(m), s = VecXd::Zero(m);
  double tau = 1.0, kappa = 1.0;

  {
    VecXd ux(n), uy(p), uz(m);
    solve3(VecXd::Zero(n), cp.b, cp.h, ux, uy, uz);
    x = ux;
    s = -uz;
    for (int si = 0; si < nseg; ++si) {
      const auto& seg = cp.cones[si];
      auto blk = s.segment(seg.offset, seg.rows);
      const double mg = cone_margin(seg, blk);
      if (mg <= 0.0) blk += (1.0 - mg) * cone_identity(seg);
    }
    solve3(-cp.c, VecXd::Zero(p), VecXd::Zero(m), ux, uy, uz);
    y = uy;
    z = uz;
    for (int si = 0; si < nseg; ++si) {
      const auto& seg = cp.cones[si];
      auto blk = z.segment(seg.offset, seg.rows);
      const double mg = cone_margin(seg, blk);
      if (mg <= 0.0) blk += (1.0 - mg) * cone_identity(seg);
    }
  }

  const double bnorm = std::max(1.0, cp.b.norm());
  const double hnorm = std::max(1.0, cp.h.norm());
  const double cnorm = std::max(1.0, cp.c.norm());

  SolveResult res;
  VecXd vx(n), vy(p), vz(m), ux(n), uy(p), uz(m);
  Directions aff, comb;

  auto unscale_into = [&](SolveResult& r, double div) {
    r.x = cp.col_scale.cwiseProduct(x) / div;
    r.s = s.cwiseQuotient(cp.cone_row_scale) / div;
    r.z = cp.cost_scale * cp.cone_row_scale.cwiseProduct(z) / div;
    r.y = cp.cost_scale * cp.eq_row_scale.head(p).cwiseProduct(y) / div;
  };

  int it = 0;
  for (;; ++it) {
    const VecXd rd = sp_at(cp, y) + sp_gt(cp, z) + cp.c * tau;
    const VecXd rp = sp_ax(cp, x) - cp.b * tau;
    const VecXd rc = sp_gx(cp, x) + s - cp.h * tau;
    const double cx = cp.c.dot(x);
    const double by = cp.b.dot(y);
    const double hz = cp.h.dot(z);
    const double rg = kappa + cx + by + hz;

    const double pcost = cx / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double relgap = gap / std::max(1.0, std::abs(pcost));
    const double pres = std::max(rp.norm() / bnorm, rc.norm() / hnorm) / tau;
    const double dres = rd.norm() / cnorm / tau;

    res.pres = pres;
    res.dres = dres;
    res.gap = gap;
    res.iterations = it;

    if (opt.verbose > 0) {
      std::printf("it %3d pcost % .6e pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e\n", it,
                  pcost * cp.cost_scale, pres, dres, gap, tau, kappa);
    }

    if (pres <= opt.feastol && dres <= opt.feastol &&
        (gap <= opt.abstol || relgap <= opt.reltol)) {
      res.status = SolveStatus::kOptimal;
      unscale_into(res, tau);
      res.objective = cp.cost_scale * pcost + prog.objective_constant;
      return res;
    }
    const double xi_p = -(by + hz);
    if (xi_p > 0.0) {
      const double pinfres = (sp_at(cp, y) + sp_gt(cp, z)).norm() / cnorm / xi_p;
      if (pinfres <= opt.feastol) {
        res.status = SolveStatus::kPrimalInfeasible;
        unscale_into(res, xi_p);
        res.objective = kInfVal;
        return res;
      }
    }
    const double xi_d = -cx;
    if (xi_d > 0.0) {
      const double dinfres =
          std::max(sp_ax(cp, x).norm() / bnorm, (sp_gx(cp, x) + s).norm() / hnorm) / xi_d;
      if (dinfres <= opt.feastol) {
        res.status = SolveStatus::kDualInfeasible;
        unscale_into(res, xi_d);
        res.objective = -kInfVal;
        return res;
      }
    }
    if (it >= opt.max_iter) break;

    for (int si = 0; si < nseg; ++si) {
      const auto& seg = cp.cones[si];
      compute_scaling(seg, s.segment(seg.offset, seg.rows), z.segment(seg.offset, seg.rows),
                      scal[si]);
    }
    kkt.factor(cp, scal);
    solve3(-cp.c, cp.b, cp.h, vx, vy, vz);
    // c'vx + b'vy + h'vz = -||W vz||^2 holds exactly for the v system; the
    // direct form avoids the cancellation the inner products suffer from
    const double cbv = -apply_w_full(vz, WMode::kW).squaredNorm();
    const double mu = (s.dot(z) + tau * kappa) / (cp.degree + 1);

    auto compute_direction = [&](double sigma, const Directions* affine, double corr_damp,
                                 Directions& out) {
      const double rho = 1.0 - sigma;
      VecXd wt_dtilde(m);
      for (int si = 0; si < nseg; ++si) {
        const auto& seg = cp.cones[si];
        const auto& w = scal[si];
        VecXd target = -jordan_prod(seg, w.lambda, w.lambda);
        if (affine != nullptr) {
          const VecXd ws = apply_w(seg, w, affine->s.segment(seg.offset, seg.rows), WMode::kWinvT);
          const VecXd wz = apply_w(seg, w, affine->z.segment(seg.offset, seg.rows), WMode::kW);
          target -= corr_damp * jordan_prod(seg, ws, wz);
          target += sigma * mu * cone_identity(seg);
        }
        wt_dtilde.segment(seg.offset, seg.rows) =
            apply_w(seg, w, jordan_div_lambda(seg, w, target), WMode::kWt);
      }
      const VecXd bz = -rho * rc - wt_dtilde;
      solve3(-rho * rd, -rho * rp, bz, ux, uy, uz);
      double dkt = -tau * kappa;
      if (affine != nullptr) dkt += -corr_damp * affine->tau * affine->kappa + sigma * mu;
      const double cbu = cp.c.dot(ux) + cp.b.dot(uy) + cp.h.dot(uz);
      const double denom = cbv - kappa / tau;
      out.tau = (-rho * rg - cbu - dkt / tau) / denom;
      if (opt.verbose >= 3) {
        std::printf("   tau-eq: rg %.3e cbu %.3e dkt/tau %.3e cbv %.3e kappa/tau %.3e\n", rg, cbu,
                    dkt / tau, cbv, kappa / tau);
      }
      out.x = ux + out.tau * vx;
      out.y = uy + out.tau * vy;
      out.z = uz + out.tau * vz;
      out.s = -rho * rc - sp_gx(cp, out.x) + cp.h * out.tau;
      out.kappa = (dkt - kappa * out.tau) / tau;

      if (opt.verbose >= 2) {
        const double e1 =
            (sp_at(cp, out.y) + sp_gt(cp, out.z) + cp.c * out.tau + rho * rd).norm();
        const double e2 = (sp_ax(cp, out.x) - cp.b * out.tau + rho * rp).norm();
        const double e3 = (sp_gx(cp, out.x) + out.s - cp.h * out.tau + rho * rc).norm();
        const double e4 = std::abs(cp.c.dot(out.x) + cp.b.dot(out.y) + cp.h.dot(out.z) +
                                   out.kappa + rho * rg);
        const double e6 = std::abs(tau * out.kappa + kappa * out.tau - dkt);
        std::printf("   newton resid: %.2e %.2e %.2e %.2e %.2e (sigma %.2e)\n", e1, e2, e3, e4,
                    e6, sigma);
      }
    };

    auto step_bound = [&](const Directions& d) {
      double a = kInfVal;
      for (int si = 0; si < nseg; ++si) {
        const auto& seg = cp.cones[si];
        const MatXd* lsf = (seg.kind == ConeKind::kPsd) ? &scal[si].ls : nullptr;
        const MatXd* lzf = (seg.kind == ConeKind::kPsd) ? &scal[si].lz : nullptr;
        a = std::min(a, max_step(seg, s.segment(seg.offset, seg.rows),
                                 d.s.segment(seg.offset, seg.rows), lsf));
        a = std::min(a, max_step(seg, z.segment(seg.offset, seg.rows),
                                 d.z.segment(seg.offset, seg.rows), lzf));
      }
      if (d.tau < 0.0) a = std::min(a, -tau / d.tau);
      if (d.kappa < 0.0) a = std::min(a, -kappa / d.kappa);
      return a;
    };

    compute_direction(0.0, nullptr, 0.0, aff);
    const double alpha_aff = std::min(1.0, step_bound(aff));
    // Mehrotra centering weight: predicted complementarity after the affine
    // step, second-order term included
    const double total_gap = s.dot(z) + tau * kappa;
    double dsdz = aff.tau * aff.kappa;
    for (int si = 0; si < nseg; ++si) {
      const auto& seg = cp.cones[si];
      dsdz += apply_w(seg, scal[si], aff.s.segment(seg.offset, seg.rows), WMode::kWinvT)
                  .dot(apply_w(seg, scal[si], aff.z.segment(seg.offset, seg.rows), WMode::kW));
    }
    double sigma = std::min(
        1.0, std::max(0.0, 1.0 - alpha_aff + dsdz / total_gap * alpha_aff * alpha_aff));
    sigma = std::min(std::pow(sigma, 3), 0.999999);

    compute_direction(sigma, &aff, alpha_aff * alpha_aff, comb);
    const double alpha = std::min(1.0, 0.99 * step_bound(comb));
    const bool finite_dir = comb.x.allFinite() && comb.z.allFinite() && comb.s.allFinite() &&
                            std::isfinite(comb.tau) && std::isfinite(comb.kappa);
    if (!finite_dir) {
      ++it;
      break;
    }
    if (opt.verbose >= 3) {
      std::printf("   alpha_aff %.3e sigma %.3e alpha %.3e dtau %.3e dkappa %.3e\n", alpha_aff,
                  sigma, alpha, comb.tau, comb.kappa);
      for (int si = 0; si < nseg; ++si) {
        const auto& seg = cp.cones[si];
        const MatXd* lsf = (seg.kind == ConeKind::kPsd) ? &scal[si].ls : nullptr;
        const MatXd* lzf = (seg.kind == ConeKind::kPsd) ? &scal[si].lz : nullptr;
        std::printf("     seg %d: step_s %.3e step_z %.3e\n", si,
                    max_step(seg, s.segment(seg.offset, seg.rows),
                             comb.s.segment(seg.offset, seg.rows), lsf),
                    max_step(seg, z.segment(seg.offset, seg.rows),
                             comb.z.segment(seg.offset, seg.rows), lzf));
      }
    }

    x += alpha * comb.x;
    y += alpha * comb.y;
    z += alpha * comb.z;
    s += alpha * comb.s;
    tau += alpha * comb.tau;
    kappa += alpha * comb.kappa;

    // the embedding is homogeneous: renormalize to keep tau+kappa = 2 and the
    // iterate well-scaled
    const double scale_pt = 2.0 / (tau + kappa);
    if (std::isfinite(scale_pt) && scale_pt > 0.0) {
      x *= scale_pt;
      y *= scale_pt;
      z *= scale_pt;
      s *= scale_pt;
      tau *= scale_pt;
      kappa *= scale_pt;
    }

    if (!(tau > 1e-14) || !std::isfinite(tau) || alpha < 1e-13) {
      ++it;
      break;
    }
  }

  res.status = SolveStatus::kMaxIter;
  unscale_into(res, tau);
  res.objective = cp.cost_scale * cp.c.dot(x) / tau + prog.objective_constant;
  res.iterations = it;
  return res;
}

}  // namespace mabeam::conic
