#pragma once

#include <Eigen/Core>

namespace odefit {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Trajectory storage: row i is the (contiguous) state at sample i.
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VectorRef = Eigen::Ref<Vector>;
using ConstVectorRef = Eigen::Ref<const Vector>;
using MatrixRef = Eigen::Ref<Matrix>;
using ConstMatrixRef = Eigen::Ref<const Matrix>;

/// Flat view of a state matrix, row-major order.
inline Eigen::Map<Vector> flat(StateMatrix& m) { return {m.data(), m.size()}; }
inline Eigen::Map<const Vector> flat(const StateMatrix& m) { return {m.data(), m.size()}; }

}  // namespace odefit
