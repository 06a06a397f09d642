#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mabeam/channel.hpp"
#include "mabeam/grid.hpp"

using namespace mabeam;
using namespace mabeam::channel;

TEST_CASE("grid dimensions and enumeration") {
  auto g = build_grid(2.0, 10.0, 60.0);
  CHECK(g.n_positions == 169);

  auto tiny = build_grid(1.0, 60.0, 60.0);
  CHECK(tiny.n_positions == 4);
  CHECK(tiny.positions[0] == Vec2d(0, 0));
  CHECK(tiny.positions[1] == Vec2d(60, 0));
  CHECK(tiny.positions[2] == Vec2d(0, 60));
  CHECK(tiny.positions[3] == Vec2d(60, 60));

  auto fine = build_grid(2.0, 2.0, 60.0);
  CHECK(fine.n_positions == 3721);

  CHECK_THROWS_AS(build_grid(2.0, 7.0, 60.0), std::invalid_argument);
}

TEST_CASE("grid regularity: nearest neighbor of interior positions equals step") {
  auto g = build_grid(1.0, 20.0, 60.0);  // 4x4
  auto d = g.distance_matrix();
  for (int i = 0; i < g.n_positions; ++i) {
    double nn = 1e300;
    for (int j = 0; j < g.n_positions; ++j) {
      if (i != j) nn = std::min(nn, d(i, j));
    }
    CHECK(nn == doctest::Approx(g.step).epsilon(1e-12));
  }
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("AoD sampling statistics") {
  Rng rng(1234);
  PathSamplingParams params;
  params.path_count = 100000;
  params.pathloss_ref = 1.0;
  params.pathloss_exponent = 2.2;
  auto sets = sample_paths({1.0}, params, rng);
  const auto& ps = sets[0];

  // sin(theta) is uniform on [-1,1]: mean 0 within 3 sigma of MC error
  double mean_sin = 0.0;
  for (int i = 0; i < ps.path_count(); ++i) mean_sin += std::sin(ps.elevation_aods[i]);
  mean_sin /= ps.path_count();
  const double mc_sigma = (1.0 / std::sqrt(3.0)) / std::sqrt(double(ps.path_count()));
  CHECK(std::abs(mean_sin) < 3.0 * mc_sigma);

  // E|psi|^2 = L0 D^-alpha = 1 at D = 1
  double mean_p = 0.0;
  for (int i = 0; i < ps.path_count(); ++i) mean_p += std::norm(ps.path_coefficients[i]);
  mean_p /= ps.path_count();
  CHECK(mean_p == doctest::Approx(1.0).epsilon(0.02));

  // Kolmogorov-Smirnov vs analytic F(theta) = (sin(theta)+1)/2
  std::vector<double> th(ps.elevation_aods.data(), ps.elevation_aods.data() + ps.path_count());
  std::sort(th.begin(), th.end());
  double ks = 0.0;
  const double n = static_cast<double>(th.size());
  for (size_t i = 0; i < th.size(); ++i) {
    const double f = (std::sin(th[i]) + 1.0) / 2.0;
    ks = std::max(ks, std::abs(f - (i + 1) / n));
    ks = std::max(ks, std::abs(f - i / n));
  }
  CHECK(ks < 0.01);

  for (int i = 0; i < 100; ++i) {
    CHECK(std::abs(ps.elevation_aods[i]) <= kPi / 2 + 1e-12);
    CHECK(std::abs(ps.azimuth_aods[i]) <= kPi / 2 + 1e-12);
  }
}

TEST_CASE("seeded determinism of path draws") {
  PathSamplingParams params;
  params.path_count = 16;
  Rng a(42), b(42);
  auto sa = sample_paths({20.0, 50.0}, params, a);
  auto sb = sample_paths({20.0, 50.0}, params, b);
  for (int u = 0; u < 2; ++u) {
    CHECK(sa[u].elevation_aods == sb[u].elevation_aods);
    CHECK(sa[u].azimuth_aods == sb[u].azimuth_aods);
    CHECK(sa[u].path_coefficients == sb[u].path_coefficients);
  }
}

TEST_CASE("field response vector values") {
  PathSet ps;
  ps.elevation_aods = VecXd::Zero(1);
  ps.azimuth_aods = VecXd::Constant(1, kPi / 2);
  ps.path_coefficients = VecXcd::Ones(1);
  const double lambda = 60.0;

  // reference position: zero phase
  auto g0 = field_response_vector(ps, Vec2d(0, 0), lambda);
  CHECK(std::abs(g0[0] - Cx(1, 0)) < 1e-14);

  // half-wavelength offset along x with theta=0, phi=pi/2: phase pi
  auto g1 = field_response_vector(ps, Vec2d(lambda / 2, 0), lambda);
  CHECK(std::abs(g1[0] - Cx(-1, 0)) < 1e-12);

  // unit modulus everywhere, and phase doubles with the offset
  Rng rng(7);
  PathSamplingParams params;
  params.path_count = 8;
  auto sets = sample_paths({30.0}, params, rng);
  auto ga = field_response_vector(sets[0], Vec2d(13, 27), lambda);
  auto gb = field_response_vector(sets[0], Vec2d(26, 54), lambda);
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(std::abs(ga[i]) - 1.0) < 1e-12);
    CHECK(std::abs(ga[i] * ga[i] - gb[i]) < 1e-12);  // phase additivity
  }
}

TEST_CASE("effective channel against per-position evaluation") {
  Rng rng(99);
  PathSamplingParams params;
  params.path_count = 5;
  auto sets = sample_paths({40.0}, params, rng);
  auto grid = build_grid(1.0, 60.0, 60.0);  // N = 4
  auto frm = field_response_matrix(sets[0], grid);
  auto h = effective_channel(frm, sets[0].path_coefficients);
  for (int n = 0; n < grid.n_positions; ++n) {
    const auto g = field_response_vector(sets[0], grid.positions[n], grid.wavelength);
    const Cx direct = sets[0].path_coefficients.dot(g);  // psi^H g
    CHECK(std::abs(h[n] - std::conj(direct)) < 1e-12);   // h-hat stacks h_k(p_n)^*
  }
  // reconstruction identity
  CHECK((h - frm.adjoint() * sets[0].path_coefficients).norm() <= 1e-12 * h.norm());

  // psi = 0 -> h = 0
  CHECK(effective_channel(frm, VecXcd::Zero(5)).norm() == 0.0);

  // single unit path: |h_n| = 1
  PathSet single;
  single.elevation_aods = VecXd::Constant(1, 0.3);
  single.azimuth_aods = VecXd::Constant(1, -0.2);
  single.path_coefficients = VecXcd::Ones(1);
  auto h1 = effective_channel(field_response_matrix(single, grid), single.path_coefficients);
  for (int n = 0; n < 4; ++n) CHECK(std::abs(std::abs(h1[n]) - 1.0) < 1e-12);

  CHECK_THROWS_AS(effective_channel(frm, VecXcd::Zero(3)), std::invalid_argument);
}

TEST_CASE("pcv perturbation") {
  Rng rng(5);
  VecXcd psi = VecXcd::Ones(2);

  CHECK(perturb_pcv(psi, 0.0, PerturbMode::kBall, rng).norm() == 0.0);

  const double eps = 0.37;
  double max_dev = 0.0;
  for (int i = 0; i < 10000; ++i) {
    auto d = perturb_pcv(psi, eps, PerturbMode::kSphere, rng);
    max_dev = std::max(max_dev, std::abs(d.norm() - eps));
  }
  CHECK(max_dev < 1e-12 * eps);

  // uniform ball in real dimension 4: E r^2 = eps^2 * dim/(dim+2) = 2/3 eps^2
  double mean_r2 = 0.0;
  for (int i = 0; i < 10000; ++i) {
    auto d = perturb_pcv(psi, eps, PerturbMode::kBall, rng);
    CHECK(d.norm() <= eps * (1 + 1e-12));
    mean_r2 += d.squaredNorm();
  }
  mean_r2 /= 10000.0;
  CHECK(mean_r2 / (eps * eps) == doctest::Approx(2.0 / 3.0).epsilon(0.02));
}

TEST_CASE("coupling matrix") {
  auto grid = build_grid(1.0, 30.0, 60.0);  // 3x3, spacing 30mm
  auto c = coupling_matrix(grid, 0.75);
  for (int i = 0; i < grid.n_positions; ++i) CHECK(std::abs(c(i, i) - Cx(1, 0)) < 1e-14);

  // positions 0 and 2 are one wavelength apart (60mm)
  CHECK(std::abs(c(0, 2)) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK(std::exp(-1.5) == doctest::Approx(0.2231).epsilon(1e-3));

  // |C| strictly decreasing in distance
  auto d = grid.distance_matrix();
  CHECK(d(0, 1) < d(0, 2));
  CHECK(std::abs(c(0, 1)) > std::abs(c(0, 2)));
  CHECK(d(0, 2) < d(0, 8));
  CHECK(std::abs(c(0, 2)) > std::abs(c(0, 8)));
}
