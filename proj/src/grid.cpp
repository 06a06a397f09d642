#include "mabeam/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace mabeam::channel {

MatXd CandidateGrid::distance_matrix() const {
  const int n = n_positions;
  MatXd d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = (positions[i] - positions[j]).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

CandidateGrid build_grid(double area_scale, double step_mm, double wavelength_mm) {
  if (area_scale <= 0.0 || step_mm <= 0.0 || wavelength_mm <= 0.0) {
    throw std::invalid_argument("build_grid: l, d, lambda must be positive");
  }
  const double side = area_scale * wavelength_mm;
  const double ratio = side / step_mm;
  const long per_axis = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(per_axis)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("build_grid: side length l*lambda is not an integer multiple of d");
  }
  CandidateGrid grid;
  grid.wavelength = wavelength_mm;
  grid.side_length = side;
  grid.step = step_mm;
  const long k = per_axis + 1;
  grid.n_positions = static_cast<int>(k * k);
  grid.positions.reserve(grid.n_positions);
  for (long row = 0; row < k; ++row) {
    for (long col = 0; col < k; ++col) {
      grid.positions.emplace_back(col * step_mm, row * step_mm);
    }
  }
  return grid;
}

MatXcd coupling_matrix(const CandidateGrid& grid, double alpha_mc) {
  if (alpha_mc <= 0.0) throw std::invalid_argument("coupling_matrix: alpha_mc must be positive");
  const MatXd d = grid.distance_matrix();
  const int n = grid.n_positions;
  MatXcd c(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Cx exponent = -(2.0 * d(i, j) / grid.wavelength) * Cx(alpha_mc, kPi);
      c(i, j) = std::exp(exponent);
    }
  }
  return c;
}

}  // namespace mabeam::channel
