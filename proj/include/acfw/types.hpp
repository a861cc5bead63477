#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace acfw {

/** Scalar type used throughout the solver stack. */
using scalar_t = double;

/** Dense column vector. */
using vector_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, 1>;

/** Dense column-major matrix. */
using matrix_t = Eigen::Matrix<scalar_t, Eigen::Dynamic, Eigen::Dynamic>;

/** Dense row-major matrix (used for flattened matrix iterates). */
using row_matrix_t =
    Eigen::Matrix<scalar_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using index_t = Eigen::Index;
using count_t = std::int64_t;

}  // namespace acfw
