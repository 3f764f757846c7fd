#pragma once

#include <Eigen/Core>

namespace ipvsim {

/// Units in rows, acts in columns.
using CountMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace ipvsim
