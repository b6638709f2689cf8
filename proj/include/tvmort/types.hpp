#pragma once

#include <Eigen/Dense>

namespace tvmort {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace tvmort
