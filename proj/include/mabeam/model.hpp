#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mabeam/channel.hpp"
#include "mabeam/grid.hpp"
#include "mabeam/rng.hpp"
#include "mabeam/types.hpp"

namespace mabeam::model {

// Scenario-level physical parameters. Distances in mm, speeds in mm/ms,
// durations in s, powers in W; energies are converted to joules when the
// instance is assembled.
struct SystemConfig {
  int ma_count = 1;              // M
  int user_count = 1;            // K
  std::vector<double> noise_w;   // sigma_k^2 per user [W]
  std::vector<double> sinr_lin;  // gamma_k per user (linear)
  double d_min_mm = 15.0;
  double speed_h_mm_ms = 0.94;
  double speed_v_mm_ms = 0.94;
  double power_h_w = 8.0;
  double power_v_w = 8.0;
  double t_ma_s = 0.030;
  double t_data_s = 0.270;
  double kappa = 0.0;
  bool coupling = false;
  double alpha_mc = 0.75;

  double frame_s() const { return t_ma_s + t_data_s; }
  void validate() const;
};

// One solvable problem: grid + channels + config + derived movement/energy
// data. Immutable after construction.
struct InstanceData {
  channel::CandidateGrid grid;
  std::vector<channel::ChannelRealization> channels;  // size K
  SystemConfig config;
  std::vector<int> initial_positions;  // grid index per element, size M
  MatXd distance_mm;                   // N x N
  MatXd move_h_mm;                     // N x M, |x_n - x_m0|
  MatXd move_v_mm;                     // N x M
  MatXd energy_j;                      // N x M, motion energy per candidate position
  double eta = 0.0;                    // curvature shift for the convexified C2
  std::optional<MatXcd> coupling_c;    // N x N, present when config.coupling

  int n() const { return grid.n_positions; }
  int m() const { return config.ma_count; }
  int k() const { return config.user_count; }
  const VecXcd& h_hat(int user) const { return channels[user].effective_channel; }
};

enum class DesignStatus { kOptimal, kFeasible, kInfeasible, kTolReached };

std::string to_string(DesignStatus s);

// A positioning + beamforming design together with its power breakdown and
// solver metadata. W columns are per-user beamformers; robust designs may
// additionally carry the lifted PSD matrices and extraction residuals.
struct DesignSolution {
  MatXd selection;  // B, N x M, binary columns summing to 1
  MatXcd beamformers;  // W, M x K
  std::vector<MatXcd> lifted;              // robust W_k matrices (may be empty)
  std::vector<double> extraction_residual; // lambda2/lambda1 per user
  bool tightness_warning = false;
  double avg_power_w = 0.0;
  double radiated_power_w = 0.0;
  double motion_energy_j = 0.0;
  DesignStatus status = DesignStatus::kInfeasible;
  int iterations = 0;
  long nodes = 0;
  double gap = 0.0;
  double wall_s = 0.0;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

// Average BS power over one frame: (sum_m b_m'e_m + T_Data * sum_k ||w_k||^2) / (T_MA + T_Data).
double average_power(const MatXd& selection, const MatXcd& beamformers,
                     const InstanceData& instance);
double motion_energy(const MatXd& selection, const InstanceData& instance);

// Received SINR per user; with_coupling applies the effective coupled channel
// h^H B (B^T C B).
VecXd sinr(const InstanceData& instance, const MatXd& selection, const MatXcd& beamformers,
           bool with_coupling = false);

// Verifies binary entries (C4), unit column sums (C5), pairwise minimum
// distance (C2) and maximum movement (C3).
FeasibilityReport check_feasible(const InstanceData& instance, const MatXd& selection);

// eta = largest singular value of D; upper-bounds the largest eigenvalue of
// every symmetrized two-block section of the pairwise distance form.
double c2bar_coefficient(const MatXd& distance);

// Exact worst-case robust SINR margin for user k: minimum over the CSI error
// ball of -(psi+d)^H G B Wt B^H G^H (psi+d) - sigma^2 gamma, computed as a
// trust-region subproblem. Nonnegative margin certifies the robust constraint.
double worst_case_margin(const InstanceData& instance, const MatXd& selection,
                         const MatXcd& beamformers, int user);

// Draws M distinct grid indices satisfying the pairwise minimum distance by
// rejection; throws when the grid admits no feasible placement.
std::vector<int> sample_initial_positions(const channel::CandidateGrid& grid, int ma_count,
                                          double d_min_mm, Rng& rng);

// Assembles the instance: distance matrix, movement/energy vectors, eta, and
// optionally the coupling matrix.
InstanceData make_instance(channel::CandidateGrid grid,
                           std::vector<channel::ChannelRealization> channels,
                           SystemConfig config, std::vector<int> initial_positions);

// Convenience: one-hot selection matrix from position indices.
MatXd selection_from_positions(int n_positions, const std::vector<int>& positions);
std::vector<int> positions_from_selection(const MatXd& selection);

}  // namespace mabeam::model
