#pragma once

#include <Eigen/Dense>

namespace iatnet {

// Dense row-major doubles; all shape checks are explicit at call sites,
// there is no implicit broadcasting anywhere in this library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace iatnet
