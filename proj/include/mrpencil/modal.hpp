#pragma once

#include "mrpencil/linear_dae.hpp"

namespace mrpencil {

/// Eigenvalues plus right/left modal matrices of the reduced state matrix,
/// normalized so w_i v_i = 1 with each v_i's largest entry real positive.
struct ModeSet {
    ComplexVector eigenvalues;  // s_i
    ComplexMatrix V;            // right eigenvectors as columns
    ComplexMatrix W;            // left eigenvectors as rows (W = V^{-1})
    bool diagonalizable = true;

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

struct ParticipationMatrices {
    ComplexMatrix P_x;  // n x n
    ComplexMatrix P_y;  // m x n, row-normalized
    std::vector<int> dominant_state_mode;  // per state, index into eigenvalues
    std::vector<int> dominant_alg_mode;    // per algebraic; -1 for a zero row
    std::vector<int> zero_row_algs;
};

ModeSet eig_reduced(const Matrix& A);

/// P_x = W^T o V (Hadamard); rows sum to 1 under the w_i v_i = 1 normalization.
ComplexMatrix participation_states(const ModeSet& modes);

/// P_y = -g_y^{-1} g_x P_x, each nonzero row scaled to unit Euclidean norm.
/// Zero rows are left as zeros and reported through the returned index list.
ComplexMatrix participation_algebraic(const LinearDae& lin, const ComplexMatrix& P_x,
                                      std::vector<int>* zero_rows = nullptr);

ParticipationMatrices participation_matrices(const LinearDae& lin, const ModeSet& modes);

/// Fast/slow split by dominant-eigenvalue natural frequency: a variable is
/// Fast iff |lambda| > delta, where lambda maximizes the absolute
/// participation factor over its row (ties to the lowest eigenvalue index).
Partition pf_partition(const LinearDae& lin, double delta);

/// Damping ratio -Re(s)/|s| (0 for s = 0).
double damping_ratio(Complex s);

}  // namespace mrpencil
