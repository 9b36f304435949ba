#pragma once

#include <Eigen/Dense>

namespace pfcd {

// Row-major so that per-node membership rows are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace pfcd
