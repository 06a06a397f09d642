#pragma once

#include <complex>

#include <Eigen/Dense>

namespace mabeam {

using Cx = std::complex<double>;
using VecXd = Eigen::VectorXd;
using VecXcd = Eigen::VectorXcd;
using MatXd = Eigen::MatrixXd;
using MatXcd = Eigen::MatrixXcd;
using Vec2d = Eigen::Vector2d;

constexpr double kPi = 3.141592653589793238462643383279502884;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace mabeam
