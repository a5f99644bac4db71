#include "mrpencil/linear_dae.hpp"

#include <Eigen/LU>
#include <sstream>

namespace mrpencil {

void LinearDae::validate() const {
    const int n = dims.n;
    const int m = dims.m;
    auto check = [&](const Matrix& M, int rows, int cols, const char* label) {
        if (M.rows() != rows || M.cols() != cols) {
            std::ostringstream os;
            os << name << ": " << label << " has shape " << M.rows() << "x" << M.cols()
               << ", expected " << rows << "x" << cols;
            throw ModelError(os.str());
        }
        if (!M.allFinite()) throw ModelError(std::string(label) + " contains non-finite entries");
    };
    check(f_x, n, n, "f_x");
    check(f_y, n, m, "f_y");
    check(g_x, m, n, "g_x");
    check(g_y, m, m, "g_y");
    if (static_cast<int>(state_names.size()) != n)
        throw ModelError(name + ": state_names size does not match n");
    if (static_cast<int>(alg_names.size()) != m)
        throw ModelError(name + ": alg_names size does not match m");
}

double LinearDae::gy_rcond() const {
    if (dims.m == 0) return 1.0;
    return Eigen::FullPivLU<Matrix>(g_y).rcond();
}

Matrix reduce_state_matrix(const LinearDae& lin) {
    lin.validate();
    if (lin.dims.m == 0) return lin.f_x;
    Eigen::FullPivLU<Matrix> lu(lin.g_y);
    const double rcond = lu.rcond();
    if (!lu.isInvertible() || !(rcond > 1e-14)) {
        std::ostringstream os;
        os << "g_y is numerically singular (rcond = " << rcond
           << "); such singularities can typically be resolved by reformulating the model "
              "into a dynamically equivalent form with a non-singular algebraic Jacobian";
        throw NumericalError(os.str());
    }
    return lin.f_x - lin.f_y * lu.solve(lin.g_x);
}

namespace {

Matrix permute(const Matrix& M, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = M(rows[i], cols[j]);
    return out;
}

void scatter(const Matrix& src, Matrix& dst, const std::vector<int>& rows,
             const std::vector<int>& cols) {
    for (int i = 0; i < src.rows(); ++i)
        for (int j = 0; j < src.cols(); ++j) dst(rows[i], cols[j]) = src(i, j);
}

}  // namespace

PartitionedLinearDae apply_partition(const LinearDae& lin, const Partition& part) {
    lin.validate();
    if (part.n() != lin.dims.n || part.m() != lin.dims.m)
        throw ModelError("partition label counts do not match model dimensions");

    PartitionedLinearDae p;
    p.dims = lin.dims;
    p.dims.n_f = part.n_fast();
    p.dims.n_s = part.n_slow();
    p.dims.m_f = part.m_fast();
    p.dims.m_s = part.m_slow();
    p.dims.validate();
    p.partition = part;
    p.state_names = lin.state_names;
    p.alg_names = lin.alg_names;
    p.name = lin.name;

    const auto sx = part.state_order();
    const auto sy = part.alg_order();
    p.fx = permute(lin.f_x, sx, sx);
    p.fy = permute(lin.f_y, sx, sy);
    p.gx = permute(lin.g_x, sy, sx);
    p.gy = permute(lin.g_y, sy, sy);
    return p;
}

LinearDae reassemble(const PartitionedLinearDae& pdae) {
    LinearDae lin;
    lin.dims = pdae.dims;
    lin.name = pdae.name;
    lin.state_names = pdae.state_names;
    lin.alg_names = pdae.alg_names;
    lin.f_x = Matrix::Zero(pdae.dims.n, pdae.dims.n);
    lin.f_y = Matrix::Zero(pdae.dims.n, pdae.dims.m);
    lin.g_x = Matrix::Zero(pdae.dims.m, pdae.dims.n);
    lin.g_y = Matrix::Zero(pdae.dims.m, pdae.dims.m);
    const auto sx = pdae.partition.state_order();
    const auto sy = pdae.partition.alg_order();
    scatter(pdae.fx, lin.f_x, sx, sx);
    scatter(pdae.fy, lin.f_y, sx, sy);
    scatter(pdae.gx, lin.g_x, sy, sx);
    scatter(pdae.gy, lin.g_y, sy, sy);
    return lin;
}

}  // namespace mrpencil
