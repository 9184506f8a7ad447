#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace odeco {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat15 = Eigen::Matrix<double, 15, 15>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr int kNumCoeffs = 15;

}  // namespace odeco
