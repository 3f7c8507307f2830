#pragma once

#include <Eigen/Dense>

namespace ptctk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace ptctk
