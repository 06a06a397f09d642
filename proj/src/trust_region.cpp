#include "mabeam/trust_region.hpp"

#include <cmath>
#include <stdexcept>

namespace mabeam::model {

namespace {

// ||d(nu)||^2 with d(nu) = -(H + nu I)^-1 c expressed in the eigenbasis.
double norm_sq(const VecXd& eigvals, const VecXd& ct, double nu) {
  double acc = 0.0;
  for (int i = 0; i < eigvals.size(); ++i) {
    const double den = eigvals[i] + nu;
    acc += (ct[i] * ct[i]) / (den * den);
  }
  return acc;
}

}  // namespace

TrsResult solve_trust_region(const MatXd& hessian, const VecXd& linear, double radius) {
  if (radius < 0.0) throw std::invalid_argument("solve_trust_region: radius >= 0 required");
  const int n = static_cast<int>(linear.size());
  TrsResult res;
  res.minimizer = VecXd::Zero(n);
  if (radius == 0.0 || n == 0) {
    res.value = 0.0;
    return res;
  }

  Eigen::SelfAdjointEigenSolver<MatXd> es(hessian);
  const VecXd lam = es.eigenvalues();
  const MatXd q = es.eigenvectors();
  const VecXd ct = q.transpose() * linear;
  const double lam_min = lam[0];
  const double scale = std::max({1.0, lam.cwiseAbs().maxCoeff(), linear.norm() / radius});

  // Interior solution when H is positive definite and -H^-1 c fits the ball.
  if (lam_min > 1e-14 * scale) {
    if (norm_sq(lam, ct, 0.0) <= radius * radius) {
      VecXd dt(n);
      for (int i = 0; i < n; ++i) dt[i] = -ct[i] / lam[i];
      res.minimizer = q * dt;
      res.value = res.minimizer.dot(hessian * res.minimizer) + 2.0 * linear.dot(res.minimizer);
      return res;
    }
  }

  const double nu_floor = std::max(0.0, -lam_min);

  // Hard case: c has no component along the bottom eigenspace and the
  // boundary equation has no root above nu_floor.
  const double eps_dir = 1e-12 * std::max(1.0, linear.norm());
  bool degenerate_ok = true;
  for (int i = 0; i < n; ++i) {
    if (std::abs(lam[i] - lam_min) <= 1e-10 * scale && std::abs(ct[i]) > eps_dir) {
      degenerate_ok = false;
      break;
    }
  }
  if (nu_floor > 0.0 && degenerate_ok) {
    // pseudo-inverse part at nu = -lam_min
    double nsq = 0.0;
    VecXd dt = VecXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (std::abs(lam[i] - lam_min) > 1e-10 * scale) {
        dt[i] = -ct[i] / (lam[i] + nu_floor);
        nsq += dt[i] * dt[i];
      }
    }
    if (nsq <= radius * radius) {
      const double alpha = std::sqrt(std::max(0.0, radius * radius - nsq));
      dt[0] += alpha;  // eigvals sorted ascending: index 0 spans the bottom eigenspace
      res.minimizer = q * dt;
      res.multiplier = nu_floor;
      res.hard_case = true;
      res.value = res.minimizer.dot(hessian * res.minimizer) + 2.0 * linear.dot(res.minimizer);
      return res;
    }
  }

  // Boundary solution: find nu in (nu_floor, inf) with ||d(nu)|| = radius.
  double lo = nu_floor;
  double hi = std::max(nu_floor * 2.0, nu_floor + 1.0);
  while (norm_sq(lam, ct, hi) > radius * radius) {
    hi = 2.0 * hi + 1.0;
    if (hi > 1e30) break;
  }
  // Newton on phi(nu) = 1/||d(nu)|| - 1/radius (convex, monotone), with
  // bisection safeguards.
  double nu = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double nsq = norm_sq(lam, ct, nu);
    const double nrm = std::sqrt(nsq);
    if (nrm > radius) {
      lo = nu;
    } else {
      hi = nu;
    }
    double dn = 0.0;  // d/dnu ||d||^2 = -2 sum ct^2/(lam+nu)^3
    for (int i = 0; i < n; ++i) {
      const double den = lam[i] + nu;
      dn += (ct[i] * ct[i]) / (den * den * den);
    }
    dn *= -2.0;
    const double phi = 1.0 / nrm - 1.0 / radius;
    const double dphi = -0.5 * dn / (nsq * nrm);
    double step = (dphi != 0.0) ? -phi / dphi : 0.0;
    double nu_next = nu + step;
    if (!(nu_next > lo && nu_next < hi)) nu_next = 0.5 * (lo + hi);
    if (std::abs(nu_next - nu) <= 1e-15 * std::max(1.0, nu)) {
      nu = nu_next;
      break;
    }
    nu = nu_next;
  }

  VecXd dt(n);
  for (int i = 0; i < n; ++i) dt[i] = -ct[i] / (lam[i] + nu);
  res.minimizer = q * dt;
  res.multiplier = nu;
  res.value = res.minimizer.dot(hessian * res.minimizer) + 2.0 * linear.dot(res.minimizer);
  return res;
}

}  // namespace mabeam::model
