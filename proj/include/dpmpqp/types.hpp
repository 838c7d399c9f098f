#pragma once

#include <Eigen/Dense>

namespace dpmpqp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace dpmpqp
