#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace ellipdiff {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

}  // namespace ellipdiff
