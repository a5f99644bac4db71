#include "mrpencil/modal.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace mrpencil {

ModeSet eig_reduced(const Matrix& A) {
    if (A.rows() != A.cols()) throw ModelError("eig_reduced: matrix must be square");
    ModeSet out;
    if (A.rows() == 0) {
        out.eigenvalues.resize(0);
        out.V.resize(0, 0);
        out.W.resize(0, 0);
        return out;
    }
    Eigen::EigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("eig_reduced: eigensolver failed");
    out.eigenvalues = es.eigenvalues();
    out.V = es.eigenvectors();

    // Scale each right eigenvector so its largest-magnitude entry is real
    // and positive; the left vectors W = V^{-1} then satisfy w_i v_i = 1.
    const int n = out.size();
    for (int i = 0; i < n; ++i) {
        int imax = 0;
        double best = -1.0;
        for (int k = 0; k < n; ++k) {
            const double mag = std::abs(out.V(k, i));
            if (mag > best + 1e-15 * best) {
                best = mag;
                imax = k;
            }
        }
        if (best <= 0.0) throw NumericalError("eig_reduced: zero eigenvector column");
        out.V.col(i) /= out.V(imax, i) / best;  // keep unit scale, rotate phase
    }

    // A defective matrix yields (numerically) parallel eigenvector columns, so
    // the condition number of V explodes even when an LU still "inverts" it.
    Eigen::JacobiSVD<ComplexMatrix> svd(out.V);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    out.diagonalizable = smin > 1e-12 * smax;
    if (out.diagonalizable) {
        out.W = Eigen::FullPivLU<ComplexMatrix>(out.V).inverse();
    } else {
        out.W = ComplexMatrix::Zero(n, n);
    }
    return out;
}

ComplexMatrix participation_states(const ModeSet& modes) {
    if (!modes.diagonalizable)
        throw NumericalError(
            "participation_states: modes are not diagonalizable; participation factors "
            "require equal algebraic and geometric multiplicities");
    // p_{ki} = w_{ik} v_{ki}: participation of state k in mode i, stored with
    // states as rows and modes as columns.
    return modes.W.transpose().cwiseProduct(modes.V);
}

ComplexMatrix participation_algebraic(const LinearDae& lin, const ComplexMatrix& P_x,
                                      std::vector<int>* zero_rows) {
    lin.validate();
    if (zero_rows) zero_rows->clear();
    if (lin.dims.m == 0) return ComplexMatrix(0, P_x.cols());

    Eigen::FullPivLU<Matrix> lu(lin.g_y);
    if (!lu.isInvertible())
        throw NumericalError("participation_algebraic: g_y is singular (rcond " +
                             std::to_string(lu.rcond()) + ")");
    ComplexMatrix P_y = (-lu.solve(lin.g_x)).cast<Complex>() * P_x;

    const double scale = P_y.size() ? P_y.cwiseAbs().maxCoeff() : 0.0;
    for (int k = 0; k < P_y.rows(); ++k) {
        const double norm = P_y.row(k).norm();
        if (norm <= 1e-14 * std::max(1.0, scale)) {
            P_y.row(k).setZero();
            if (zero_rows) zero_rows->push_back(k);
        } else {
            P_y.row(k) /= norm;
        }
    }
    return P_y;
}

namespace {

int dominant_index(const Eigen::RowVectorXcd& row) {
    int best = 0;
    double bestmag = -1.0;
    for (int i = 0; i < row.size(); ++i) {
        const double mag = std::abs(row(i));
        if (mag > bestmag * (1.0 + 1e-12)) {
            bestmag = mag;
            best = i;
        }
    }
    return best;
}

}  // namespace

ParticipationMatrices participation_matrices(const LinearDae& lin, const ModeSet& modes) {
    ParticipationMatrices out;
    out.P_x = participation_states(modes);
    out.P_y = participation_algebraic(lin, out.P_x, &out.zero_row_algs);
    out.dominant_state_mode.resize(lin.dims.n);
    for (int k = 0; k < lin.dims.n; ++k)
        out.dominant_state_mode[k] = dominant_index(out.P_x.row(k));
    out.dominant_alg_mode.assign(lin.dims.m, -1);
    for (int k = 0; k < lin.dims.m; ++k) {
        const bool zero =
            std::find(out.zero_row_algs.begin(), out.zero_row_algs.end(), k) !=
            out.zero_row_algs.end();
        if (!zero) out.dominant_alg_mode[k] = dominant_index(out.P_y.row(k));
    }
    return out;
}

Partition pf_partition(const LinearDae& lin, double delta) {
    const Matrix A = reduce_state_matrix(lin);
    const ModeSet modes = eig_reduced(A);
    const ParticipationMatrices pm = participation_matrices(lin, modes);

    Partition part;
    part.state_class.resize(lin.dims.n);
    part.alg_class.resize(lin.dims.m);
    part.zero_row_algs = pm.zero_row_algs;
    for (int k = 0; k < lin.dims.n; ++k) {
        const Complex s = modes.eigenvalues(pm.dominant_state_mode[k]);
        part.state_class[k] = std::abs(s) > delta ? VarClass::Fast : VarClass::Slow;
    }
    for (int k = 0; k < lin.dims.m; ++k) {
        if (pm.dominant_alg_mode[k] < 0) {
            part.alg_class[k] = VarClass::Slow;  // no dynamics participate
            continue;
        }
        const Complex s = modes.eigenvalues(pm.dominant_alg_mode[k]);
        part.alg_class[k] = std::abs(s) > delta ? VarClass::Fast : VarClass::Slow;
    }
    return part;
}

double damping_ratio(Complex s) {
    const double mag = std::abs(s);
    if (mag == 0.0) return 0.0;
    return -s.real() / mag;
}

}  // namespace mrpencil
