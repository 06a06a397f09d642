#include "mabeam/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace mabeam::channel {

std::vector<PathSet> sample_paths(const std::vector<double>& user_distances_m,
                                  const PathSamplingParams& params, Rng& rng) {
  if (params.path_count < 1) throw std::invalid_argument("sample_paths: L >= 1 required");
  std::vector<PathSet> out;
  out.reserve(user_distances_m.size());
  for (double dist : user_distances_m) {
    if (dist <= 0.0) throw std::invalid_argument("sample_paths: user distance must be positive");
    const int l = params.path_count;
    PathSet ps;
    ps.elevation_aods.resize(l);
    ps.azimuth_aods.resize(l);
    ps.path_coefficients.resize(l);
    double var = params.pathloss_ref * std::pow(dist, -params.pathloss_exponent);
    if (params.normalize_per_path) var /= static_cast<double>(l);
    const double sigma = std::sqrt(var);
    for (int i = 0; i < l; ++i) {
      ps.elevation_aods[i] = std::asin(2.0 * rng.uniform() - 1.0);
      ps.azimuth_aods[i] = rng.uniform(-kPi / 2.0, kPi / 2.0);
      ps.path_coefficients[i] = sigma * rng.cgaussian();
    }
    out.push_back(std::move(ps));
  }
  return out;
}

VecXcd field_response_vector(const PathSet& paths, const Vec2d& position_mm,
                             double wavelength_mm) {
  const int l = paths.path_count();
  VecXcd g(l);
  const double c = 2.0 * kPi / wavelength_mm;
  for (int i = 0; i < l; ++i) {
    const double rho =
        c * (position_mm.x() * std::cos(paths.elevation_aods[i]) * std::sin(paths.azimuth_aods[i]) +
             position_mm.y() * std::sin(paths.elevation_aods[i]));
    g[i] = Cx(std::cos(rho), std::sin(rho));
  }
  return g;
}

MatXcd field_response_matrix(const PathSet& paths, const CandidateGrid& grid) {
  const int l = paths.path_count();
  MatXcd g(l, grid.n_positions);
  for (int n = 0; n < grid.n_positions; ++n) {
    g.col(n) = field_response_vector(paths, grid.positions[n], grid.wavelength);
  }
  return g;
}

VecXcd effective_channel(const MatXcd& frm, const VecXcd& pcv) {
  if (frm.rows() != pcv.size()) {
    throw std::invalid_argument("effective_channel: FRM rows must match PCV length");
  }
  return frm.adjoint() * pcv;
}

VecXcd perturb_pcv(const VecXcd& pcv, double eps, PerturbMode mode, Rng& rng) {
  if (eps < 0.0) throw std::invalid_argument("perturb_pcv: eps >= 0 required");
  const int l = static_cast<int>(pcv.size());
  if (eps == 0.0) return VecXcd::Zero(l);
  VecXcd d(l);
  for (int i = 0; i < l; ++i) d[i] = rng.cgaussian();
  const double nrm = d.norm();
  d *= eps / nrm;
  if (mode == PerturbMode::kBall) {
    // radius ~ U^{1/(2L)}: uniform over the complex L-ball (real dimension 2L)
    d *= std::pow(rng.uniform(), 1.0 / (2.0 * l));
  }
  return d;
}

ChannelRealization make_realization(const PathSet& paths, const CandidateGrid& grid,
                                    double kappa) {
  ChannelRealization r;
  r.path_set = paths;
  r.frm = field_response_matrix(paths, grid);
  r.effective_channel = effective_channel(r.frm, paths.path_coefficients);
  r.error_radius = kappa * paths.path_coefficients.norm();
  return r;
}

}  // namespace mabeam::channel
