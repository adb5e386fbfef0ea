#pragma once

#include <complex>

#include <Eigen/Core>

namespace dqa {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Bit depth sentinel for an ideal (unquantized) front end.
inline constexpr int kFullResolution = 0;

}  // namespace dqa
