#pragma once

#include <Eigen/Dense>

namespace vfm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// n x d, one sample per row.
using Batch = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace vfm
