#include "mrpencil/nonlinear.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>

namespace mrpencil {

NonlinearModel NonlinearModel::with_parameter(const std::string& key, double value) const {
    if (params.find(key) == params.end())
        throw ModelError(name + ": unknown parameter '" + key + "'");
    NonlinearModel out = *this;
    out.params[key] = value;
    return out;
}

double NonlinearModel::residual_inf(const Vector& x, const Vector& y) const {
    const Vector fv = eval_f(x, y);
    const Vector gv = eval_g(x, y);
    const double fn = fv.size() ? fv.cwiseAbs().maxCoeff() : 0.0;
    const double gn = gv.size() ? gv.cwiseAbs().maxCoeff() : 0.0;
    return std::max(fn, gn);
}

namespace {

JacobianBlocks finite_difference_jacobian(const NonlinearModel& model, const Vector& x,
                                          const Vector& y) {
    const int n = model.dims.n;
    const int m = model.dims.m;
    JacobianBlocks J;
    J.f_x.resize(n, n);
    J.f_y.resize(n, m);
    J.g_x.resize(m, n);
    J.g_y.resize(m, m);

    auto step = [](double v) { return 1e-7 * std::max(1.0, std::abs(v)); };

    for (int j = 0; j < n; ++j) {
        const double h = step(x(j));
        Vector xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const Vector fp = model.eval_f(xp, y), fm = model.eval_f(xm, y);
        const Vector gp = model.eval_g(xp, y), gm = model.eval_g(xm, y);
        if (!fp.allFinite() || !fm.allFinite() || !gp.allFinite() || !gm.allFinite())
            throw NumericalError("evaluator failure at perturbed point (state " +
                                 std::to_string(j) + ")");
        J.f_x.col(j) = (fp - fm) / (2 * h);
        J.g_x.col(j) = (gp - gm) / (2 * h);
    }
    for (int j = 0; j < m; ++j) {
        const double h = step(y(j));
        Vector yp = y, ym = y;
        yp(j) += h;
        ym(j) -= h;
        const Vector fp = model.eval_f(x, yp), fm = model.eval_f(x, ym);
        const Vector gp = model.eval_g(x, yp), gm = model.eval_g(x, ym);
        if (!fp.allFinite() || !fm.allFinite() || !gp.allFinite() || !gm.allFinite())
            throw NumericalError("evaluator failure at perturbed point (algebraic " +
                                 std::to_string(j) + ")");
        J.f_y.col(j) = (fp - fm) / (2 * h);
        J.g_y.col(j) = (gp - gm) / (2 * h);
    }
    return J;
}

}  // namespace

JacobianBlocks jacobian_at(const NonlinearModel& model, const Vector& x, const Vector& y) {
    if (model.jacobian) return model.jacobian(x, y, model.params);
    return finite_difference_jacobian(model, x, y);
}

LinearizeResult linearize(const NonlinearModel& model, const Vector& x, const Vector& y) {
    if (x.size() != model.dims.n || y.size() != model.dims.m)
        throw ModelError("linearize: point size does not match model dims");
    LinearizeResult out;
    out.off_equilibrium = model.residual_inf(x, y) > 1e-6;

    JacobianBlocks J = jacobian_at(model, x, y);
    out.dae.dims = Dims{model.dims.n, model.dims.m, 0, model.dims.n, 0, model.dims.m};
    out.dae.f_x = std::move(J.f_x);
    out.dae.f_y = std::move(J.f_y);
    out.dae.g_x = std::move(J.g_x);
    out.dae.g_y = std::move(J.g_y);
    out.dae.state_names = model.state_names;
    out.dae.alg_names = model.alg_names;
    out.dae.name = model.name + "_linearized";
    if (out.off_equilibrium)
        out.dae.warnings.push_back("linearization point is not an equilibrium (residual > 1e-6)");
    out.dae.validate();
    return out;
}

void find_equilibrium(const NonlinearModel& model, Vector& x, Vector& y, double tol,
                      int max_iter) {
    const int n = model.dims.n;
    const int m = model.dims.m;
    auto residual = [&](const Vector& xv, const Vector& yv) {
        Vector r(n + m);
        r.head(n) = model.eval_f(xv, yv);
        r.tail(m) = model.eval_g(xv, yv);
        return r;
    };

    Vector r = residual(x, y);
    for (int it = 0; it < max_iter; ++it) {
        if (r.cwiseAbs().maxCoeff() <= tol) return;
        JacobianBlocks J = jacobian_at(model, x, y);
        Matrix full(n + m, n + m);
        full << J.f_x, J.f_y, J.g_x, J.g_y;
        Eigen::PartialPivLU<Matrix> lu(full);
        const Vector dz = lu.solve(-r);
        double alpha = 1.0;
        const double r0 = r.norm();
        for (int halving = 0; halving < 40; ++halving) {
            Vector xn = x + alpha * dz.head(n);
            Vector yn = y + alpha * dz.tail(m);
            Vector rn = residual(xn, yn);
            if (rn.allFinite() && rn.norm() < r0) {
                x = xn;
                y = yn;
                r = rn;
                break;
            }
            alpha *= 0.5;
            if (halving == 39)
                throw NumericalError("find_equilibrium: damped Newton stalled at residual " +
                                     std::to_string(r0));
        }
    }
    if (r.cwiseAbs().maxCoeff() > tol)
        throw NumericalError("find_equilibrium: no convergence within iteration limit");
}

NonlinearModel as_nonlinear(const LinearDae& lin) {
    lin.validate();
    NonlinearModel model;
    model.name = lin.name;
    model.dims = lin.dims;
    model.state_names = lin.state_names;
    model.alg_names = lin.alg_names;
    model.x_eq = Vector::Zero(lin.dims.n);
    model.y_eq = Vector::Zero(lin.dims.m);
    const Matrix fx = lin.f_x, fy = lin.f_y, gx = lin.g_x, gy = lin.g_y;
    model.f = [fx, fy](const Vector& x, const Vector& y, const ParamMap&) -> Vector {
        return fx * x + fy * y;
    };
    model.g = [gx, gy](const Vector& x, const Vector& y, const ParamMap&) -> Vector {
        return gx * x + gy * y;
    };
    model.jacobian = [fx, fy, gx, gy](const Vector&, const Vector&, const ParamMap&) {
        return JacobianBlocks{fx, fy, gx, gy};
    };
    return model;
}

}  // namespace mrpencil
