#pragma once

#include <vector>

#include "mabeam/grid.hpp"
#include "mabeam/rng.hpp"
#include "mabeam/types.hpp"

namespace mabeam::channel {

// Multipath geometry and gains for one user.
struct PathSet {
  VecXd elevation_aods;      // theta, rad, in [-pi/2, pi/2]
  VecXd azimuth_aods;        // phi, rad, in [-pi/2, pi/2]
  VecXcd path_coefficients;  // psi-bar, length L

  int path_count() const { return static_cast<int>(path_coefficients.size()); }
};

// One user's channel: field-response matrix over the candidate grid, nominal
// path-coefficient vector, the derived effective channel and the CSI error
// radius epsilon = kappa * ||psi||.
struct ChannelRealization {
  PathSet path_set;
  MatXcd frm;                // G, L x N, unit-modulus entries
  VecXcd effective_channel;  // h-hat = G^H psi, length N
  double error_radius = 0.0;
};

struct PathSamplingParams {
  int path_count = 1;
  double pathloss_ref = 1.0;       // L0
  double pathloss_exponent = 2.2;  // alpha
  bool normalize_per_path = false; // divide per-path variance by L
};

// Draws AoDs from f(theta, phi) = cos(theta)/(2*pi) via the exact inverse CDF
// (theta = asin(2U-1), phi uniform) and i.i.d. CN(0, L0 * D^-alpha) path
// coefficients. One PathSet per user distance.
std::vector<PathSet> sample_paths(const std::vector<double>& user_distances_m,
                                  const PathSamplingParams& params, Rng& rng);

// Field-response vector at position p (mm): entry l = exp(j*rho_l(p)) with
// rho_l(p) = (2*pi/lambda) * ((x - x1) cos(theta_l) sin(phi_l) + (y - y1) sin(theta_l)).
// The phase reference is the grid corner p1 = (0, 0).
VecXcd field_response_vector(const PathSet& paths, const Vec2d& position_mm,
                             double wavelength_mm);

// Stacks field_response_vector over all grid positions (column n = position n).
MatXcd field_response_matrix(const PathSet& paths, const CandidateGrid& grid);

// h-hat = G^H psi. Throws on dimension mismatch.
VecXcd effective_channel(const MatXcd& frm, const VecXcd& pcv);

enum class PerturbMode { kBall, kSphere };

// Draws a CSI error with ||dpsi|| <= eps (ball) or == eps (sphere).
VecXcd perturb_pcv(const VecXcd& pcv, double eps, PerturbMode mode, Rng& rng);

// Assembles the full realization for one user.
ChannelRealization make_realization(const PathSet& paths, const CandidateGrid& grid,
                                    double kappa);

}  // namespace mabeam::channel
