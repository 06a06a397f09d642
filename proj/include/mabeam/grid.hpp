#pragma once

#include <vector>

#include "mabeam/types.hpp"

namespace mabeam::channel {

// Quantized 2-D transmit area. Positions form a regular square lattice with
// spacing `step`, enumerated row-major starting at the phase-reference corner
// (0, 0); the x coordinate is the fast axis. All lengths in mm.
struct CandidateGrid {
  double wavelength = 0.0;   // lambda [mm]
  double side_length = 0.0;  // l * lambda [mm]
  double step = 0.0;         // d [mm]
  std::vector<Vec2d> positions;
  int n_positions = 0;

  const Vec2d& position(int n) const { return positions.at(n); }

  // Euclidean distance matrix between candidate positions [mm].
  MatXd distance_matrix() const;
};

// Builds the (l*lambda/d + 1)^2 position grid. Throws std::invalid_argument
// when l*lambda is not an integer multiple of d (misconfigured scenario).
CandidateGrid build_grid(double area_scale, double step_mm, double wavelength_mm);

// Mutual-coupling matrix C_{n,n'} = exp(-(2 D_{n,n'}/lambda)(alpha_mc + j*pi)).
MatXcd coupling_matrix(const CandidateGrid& grid, double alpha_mc);

}  // namespace mabeam::channel
