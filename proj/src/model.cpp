#include "mabeam/model.hpp"

#include <cmath>
#include <stdexcept>

#include "mabeam/trust_region.hpp"

namespace mabeam::model {

void SystemConfig::validate() const {
  if (ma_count < 1 || user_count < 1) throw std::invalid_argument("config: M >= 1, K >= 1");
  if (static_cast<int>(noise_w.size()) != user_count ||
      static_cast<int>(sinr_lin.size()) != user_count) {
    throw std::invalid_argument("config: per-user noise/sinr sizes must equal K");
  }
  for (double s : noise_w)
    if (s <= 0.0) throw std::invalid_argument("config: noise power must be positive");
  for (double g : sinr_lin)
    if (g <= 0.0) throw std::invalid_argument("config: SINR targets must be positive");
  if (speed_h_mm_ms <= 0.0 || speed_v_mm_ms <= 0.0 || power_h_w <= 0.0 || power_v_w <= 0.0 ||
      t_ma_s <= 0.0 || t_data_s <= 0.0) {
    throw std::invalid_argument("config: speeds, powers and durations must be positive");
  }
  if (kappa < 0.0) throw std::invalid_argument("config: kappa >= 0");
}

std::string to_string(DesignStatus s) {
  switch (s) {
    case DesignStatus::kOptimal: return "optimal";
    case DesignStatus::kFeasible: return "feasible";
    case DesignStatus::kInfeasible: return "infeasible";
    case DesignStatus::kTolReached: return "tol-reached";
  }
  return "unknown";
}

double motion_energy(const MatXd& selection, const InstanceData& instance) {
  double e = 0.0;
  for (int m = 0; m < instance.m(); ++m) {
    e += selection.col(m).dot(instance.energy_j.col(m));
  }
  return e;
}

double average_power(const MatXd& selection, const MatXcd& beamformers,
                     const InstanceData& instance) {
  const double radiated = beamformers.squaredNorm();
  return (motion_energy(selection, instance) + radiated * instance.config.t_data_s) /
         instance.config.frame_s();
}

VecXd sinr(const InstanceData& instance, const MatXd& selection, const MatXcd& beamformers,
           bool with_coupling) {
  const int k = instance.k();
  MatXcd effective = selection.cast<Cx>();  // N x M
  if (with_coupling) {
    if (!instance.coupling_c) throw std::invalid_argument("sinr: coupling matrix unavailable");
    const MatXcd c_hat = selection.transpose().cast<Cx>() * (*instance.coupling_c) *
                         selection.cast<Cx>();  // M x M
    effective = selection.cast<Cx>() * c_hat;
  }
  VecXd out(k);
  for (int u = 0; u < k; ++u) {
    const VecXcd heff = effective.adjoint() * instance.h_hat(u);  // M
    double sig = 0.0, intf = 0.0;
    for (int j = 0; j < k; ++j) {
      const double p = std::norm(heff.dot(beamformers.col(j)));
      if (j == u) sig = p; else intf += p;
    }
    out[u] = sig / (intf + instance.config.noise_w[u]);
  }
  return out;
}

FeasibilityReport check_feasible(const InstanceData& instance, const MatXd& selection) {
  FeasibilityReport rep;
  const int n = instance.n();
  const int m = instance.m();
  if (selection.rows() != n || selection.cols() != m) {
    rep.feasible = false;
    rep.violations.push_back("shape: selection must be N x M");
    return rep;
  }
  const double tol = 1e-9;
  for (int c = 0; c < m; ++c) {
    double sum = 0.0;
    for (int r = 0; r < n; ++r) {
      const double v = selection(r, c);
      if (std::abs(v) > tol && std::abs(v - 1.0) > tol) {
        rep.feasible = false;
        rep.violations.push_back("C4: non-binary entry at element " + std::to_string(c + 1));
        break;
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      rep.feasible = false;
      rep.violations.push_back("C5: column sum != 1 for element " + std::to_string(c + 1));
    }
  }
  if (!rep.feasible) return rep;
  const double dmin = instance.config.d_min_mm;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const double dist = selection.col(a).dot(instance.distance_mm * selection.col(b));
      if (dist < dmin - 1e-9) {
        rep.feasible = false;
        rep.violations.push_back("C2: elements " + std::to_string(a + 1) + "," +
                                 std::to_string(b + 1) + " closer than D_min");
      }
    }
  }
  const double dh_max = instance.config.speed_h_mm_ms * instance.config.t_ma_s * 1e3;
  const double dv_max = instance.config.speed_v_mm_ms * instance.config.t_ma_s * 1e3;
  for (int c = 0; c < m; ++c) {
    const double mh = selection.col(c).dot(instance.move_h_mm.col(c));
    const double mv = selection.col(c).dot(instance.move_v_mm.col(c));
    if (mh > dh_max + 1e-9 || mv > dv_max + 1e-9) {
      rep.feasible = false;
      rep.violations.push_back("C3: element " + std::to_string(c + 1) + " exceeds max movement");
    }
  }
  return rep;
}

double c2bar_coefficient(const MatXd& distance) {
  if (distance.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatXd> svd(distance);
  return svd.singularValues()[0];
}

double worst_case_margin(const InstanceData& instance, const MatXd& selection,
                         const MatXcd& beamformers, int user) {
  const auto& chan = instance.channels[user];
  const int l = chan.path_set.path_count();
  const double gamma = instance.config.sinr_lin[user];
  const double sigma2 = instance.config.noise_w[user];
  const int k = instance.k();

  // Wt = gamma * sum_{k' != k} w w^H - w_k w_k^H, evaluated through B G^H.
  const MatXcd gb = chan.frm * selection.cast<Cx>();  // L x M
  MatXcd q_mat = MatXcd::Zero(l, l);
  for (int j = 0; j < k; ++j) {
    const VecXcd v = gb * beamformers.col(j);  // L
    if (j == user) {
      q_mat -= v * v.adjoint();
    } else {
      q_mat += gamma * (v * v.adjoint());
    }
  }

  // margin(d) = -(psi+d)^H Q (psi+d) - sigma^2 gamma; minimize over ||d|| <= eps.
  const VecXcd psi = chan.path_set.path_coefficients;
  const VecXcd c_cx = -(q_mat * psi);
  const double c0 = -std::real(psi.dot(q_mat * psi)) - sigma2 * gamma;

  // real embedding of the complex quadratic
  MatXd h_re(2 * l, 2 * l);
  h_re << (-q_mat).real(), -(-q_mat).imag(), (-q_mat).imag(), (-q_mat).real();
  VecXd c_re(2 * l);
  c_re << c_cx.real(), c_cx.imag();

  const auto trs = solve_trust_region(h_re, c_re, chan.error_radius);
  return trs.value + c0;
}

std::vector<int> sample_initial_positions(const channel::CandidateGrid& grid, int ma_count,
                                          double d_min_mm, Rng& rng) {
  const int n = grid.n_positions;
  const int max_attempts = 2000 * std::max(1, ma_count);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<int> picks;
    picks.reserve(ma_count);
    bool ok = true;
    for (int m = 0; m < ma_count && ok; ++m) {
      const int cand = static_cast<int>(rng.uniform_index(n));
      for (int prev : picks) {
        if ((grid.positions[cand] - grid.positions[prev]).norm() < d_min_mm) {
          ok = false;
          break;
        }
      }
      if (ok) picks.push_back(cand);
    }
    if (ok) return picks;
  }
  throw std::runtime_error(
      "sample_initial_positions: no placement satisfying D_min found (structurally infeasible?)");
}

InstanceData make_instance(channel::CandidateGrid grid,
                           std::vector<channel::ChannelRealization> channels,
                           SystemConfig config, std::vector<int> initial_positions) {
  config.validate();
  if (static_cast<int>(channels.size()) != config.user_count) {
    throw std::invalid_argument("make_instance: channel count must equal K");
  }
  if (static_cast<int>(initial_positions.size()) != config.ma_count) {
    throw std::invalid_argument("make_instance: initial position count must equal M");
  }
  InstanceData inst;
  inst.grid = std::move(grid);
  inst.channels = std::move(channels);
  inst.config = std::move(config);
  inst.initial_positions = std::move(initial_positions);
  const int n = inst.grid.n_positions;
  const int m = inst.config.ma_count;
  for (int i = 0; i < m; ++i) {
    const int p = inst.initial_positions[i];
    if (p < 0 || p >= n) throw std::invalid_argument("make_instance: initial position off grid");
    for (int j = i + 1; j < m; ++j) {
      const int q = inst.initial_positions[j];
      if ((inst.grid.positions[p] - inst.grid.positions[q]).norm() <
          inst.config.d_min_mm - 1e-9) {
        throw std::invalid_argument("make_instance: initial positions violate D_min");
      }
    }
  }
  inst.distance_mm = inst.grid.distance_matrix();
  inst.move_h_mm.resize(n, m);
  inst.move_v_mm.resize(n, m);
  inst.energy_j.resize(n, m);
  for (int c = 0; c < m; ++c) {
    const Vec2d origin = inst.grid.positions[inst.initial_positions[c]];
    for (int r = 0; r < n; ++r) {
      const double dx = std::abs(inst.grid.positions[r].x() - origin.x());
      const double dy = std::abs(inst.grid.positions[r].y() - origin.y());
      inst.move_h_mm(r, c) = dx;
      inst.move_v_mm(r, c) = dy;
      // time [ms] = dist/speed; energy [J] = P [W] * time [ms] * 1e-3
      inst.energy_j(r, c) = 1e-3 * (inst.config.power_h_w * dx / inst.config.speed_h_mm_ms +
                                    inst.config.power_v_w * dy / inst.config.speed_v_mm_ms);
    }
  }
  inst.eta = c2bar_coefficient(inst.distance_mm);
  if (inst.config.coupling) {
    inst.coupling_c = channel::coupling_matrix(inst.grid, inst.config.alpha_mc);
  }
  return inst;
}

MatXd selection_from_positions(int n_positions, const std::vector<int>& positions) {
  MatXd b = MatXd::Zero(n_positions, static_cast<int>(positions.size()));
  for (size_t m = 0; m < positions.size(); ++m) b(positions[m], static_cast<int>(m)) = 1.0;
  return b;
}

std::vector<int> positions_from_selection(const MatXd& selection) {
  std::vector<int> out(selection.cols());
  for (int c = 0; c < selection.cols(); ++c) {
    int best = 0;
    for (int r = 1; r < selection.rows(); ++r) {
      if (selection(r, c) > selection(best, c)) best = r;
    }
    out[c] = best;
  }
  return out;
}

}  // namespace mabeam::model
