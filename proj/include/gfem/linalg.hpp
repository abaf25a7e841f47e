#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gfem {

using Matrix = Eigen::SparseMatrix<double>;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

} // namespace gfem
