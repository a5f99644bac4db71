#pragma once

#include "mrpencil/types.hpp"

namespace mrpencil {

/// Linearized DAE: x' = f_x x + f_y y, 0 = g_x x + g_y y.
struct LinearDae {
    Dims dims;
    Matrix f_x;  // n x n
    Matrix f_y;  // n x m
    Matrix g_x;  // m x n
    Matrix g_y;  // m x m
    std::vector<std::string> state_names;
    std::vector<std::string> alg_names;
    std::string name;
    std::vector<std::string> warnings;

    void validate() const;

    /// Reciprocal condition estimate of g_y (0 for empty m).
    double gy_rcond() const;
};

/// The sixteen fast/slow sub-blocks, stored as block-permuted matrices.
/// Row/column order inside each matrix is (fast vars, slow vars).
struct PartitionedLinearDae {
    Dims dims;
    Partition partition;
    Matrix fx;  // n x n, block order
    Matrix fy;  // n x m
    Matrix gx;  // m x n
    Matrix gy;  // m x m
    std::vector<std::string> state_names;  // original order
    std::vector<std::string> alg_names;
    std::string name;

    // Individual blocks, f_ff_x etc.
    Matrix f_ff_x() const { return fx.topLeftCorner(dims.n_f, dims.n_f); }
    Matrix f_fs_x() const { return fx.topRightCorner(dims.n_f, dims.n_s); }
    Matrix f_sf_x() const { return fx.bottomLeftCorner(dims.n_s, dims.n_f); }
    Matrix f_ss_x() const { return fx.bottomRightCorner(dims.n_s, dims.n_s); }
    Matrix f_ff_y() const { return fy.topLeftCorner(dims.n_f, dims.m_f); }
    Matrix f_fs_y() const { return fy.topRightCorner(dims.n_f, dims.m_s); }
    Matrix f_sf_y() const { return fy.bottomLeftCorner(dims.n_s, dims.m_f); }
    Matrix f_ss_y() const { return fy.bottomRightCorner(dims.n_s, dims.m_s); }
    Matrix g_ff_x() const { return gx.topLeftCorner(dims.m_f, dims.n_f); }
    Matrix g_fs_x() const { return gx.topRightCorner(dims.m_f, dims.n_s); }
    Matrix g_sf_x() const { return gx.bottomLeftCorner(dims.m_s, dims.n_f); }
    Matrix g_ss_x() const { return gx.bottomRightCorner(dims.m_s, dims.n_s); }
    Matrix g_ff_y() const { return gy.topLeftCorner(dims.m_f, dims.m_f); }
    Matrix g_fs_y() const { return gy.topRightCorner(dims.m_f, dims.m_s); }
    Matrix g_sf_y() const { return gy.bottomLeftCorner(dims.m_s, dims.m_f); }
    Matrix g_ss_y() const { return gy.bottomRightCorner(dims.m_s, dims.m_s); }
};

/// A = f_x - f_y gy^{-1} g_x, via a linear solve.
Matrix reduce_state_matrix(const LinearDae& lin);

/// Permute the Jacobians into fast/slow block form.
PartitionedLinearDae apply_partition(const LinearDae& lin, const Partition& part);

/// Undo apply_partition; exact by construction.
LinearDae reassemble(const PartitionedLinearDae& pdae);

}  // namespace mrpencil
