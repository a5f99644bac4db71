#include <cmath>

#include "mrpencil/nonlinear.hpp"

namespace mrpencil {

namespace {

LinearDae make_decoupled2() {
    LinearDae lin;
    lin.name = "decoupled2";
    lin.dims = Dims{2, 2, 0, 2, 0, 2};
    lin.f_x = (Matrix(2, 2) << -50.0, 0.0, 0.0, -1.0).finished();
    lin.f_y = Matrix::Zero(2, 2);
    lin.g_x = Matrix::Identity(2, 2);
    lin.g_y = -Matrix::Identity(2, 2);
    lin.state_names = {"x_fast", "x_slow"};
    lin.alg_names = {"y_fast", "y_slow"};
    return lin;
}

LinearDae make_coupled_stiff() {
    LinearDae lin;
    lin.name = "coupled_stiff";
    lin.dims = Dims{2, 2, 0, 2, 0, 2};
    lin.f_x = (Matrix(2, 2) << -50.0, 2.0, 0.5, -1.0).finished();
    lin.f_y = (Matrix(2, 2) << 0.2, 0.0, 0.0, 0.1).finished();
    lin.g_x = Matrix::Identity(2, 2);
    lin.g_y = -Matrix::Identity(2, 2);
    lin.state_names = {"x1", "x2"};
    lin.alg_names = {"y1", "y2"};
    return lin;
}

// Single machine / infinite bus with a first-order exciter.
// States: rotor angle delta, speed omega, internal voltage e_q, regulator
// output v_r. Algebraics: electrical power p_e, terminal voltage v_t.
NonlinearModel make_smib_avr() {
    NonlinearModel model;
    model.name = "smib_avr";
    model.dims = Dims{4, 2, 0, 4, 0, 2};
    model.state_names = {"delta", "omega", "e_q", "v_r"};
    model.alg_names = {"p_e", "v_t"};
    model.params = {
        {"omega_b", 100.0 * M_PI}, {"H", 3.0},    {"D", 2.0},     {"T_d0", 5.0},
        {"T_a", 0.02},             {"K_a", 50.0}, {"v_inf", 1.0}, {"x_e", 0.5},
        {"p_m", 0.8},              {"v_ref", 0.0},  // set below from the equilibrium
    };

    model.f = [](const Vector& x, const Vector& y, const ParamMap& p) -> Vector {
        const double delta = x(0), omega = x(1), e_q = x(2), v_r = x(3);
        const double p_e = y(0), v_t = y(1);
        Vector f(4);
        f(0) = p.at("omega_b") * (omega - 1.0);
        f(1) = (p.at("p_m") - p_e - p.at("D") * (omega - 1.0)) / (2.0 * p.at("H"));
        f(2) = (v_r - e_q) / p.at("T_d0");
        f(3) = (p.at("K_a") * (p.at("v_ref") - v_t) - v_r) / p.at("T_a");
        (void)delta;
        return f;
    };
    model.g = [](const Vector& x, const Vector& y, const ParamMap& p) -> Vector {
        const double delta = x(0), e_q = x(2);
        const double p_e = y(0), v_t = y(1);
        const double v_inf = p.at("v_inf"), x_e = p.at("x_e");
        Vector g(2);
        g(0) = p_e - (e_q * v_inf / x_e) * std::sin(delta);
        g(1) = v_t - std::sqrt(e_q * e_q + v_inf * v_inf + 2.0 * e_q * v_inf * std::cos(delta));
        return g;
    };
    model.jacobian = [](const Vector& x, const Vector& y, const ParamMap& p) -> JacobianBlocks {
        const double delta = x(0), e_q = x(2);
        const double v_inf = p.at("v_inf"), x_e = p.at("x_e");
        const double H2 = 2.0 * p.at("H");
        (void)y;

        JacobianBlocks J;
        J.f_x = Matrix::Zero(4, 4);
        J.f_y = Matrix::Zero(4, 2);
        J.g_x = Matrix::Zero(2, 4);
        J.g_y = Matrix::Zero(2, 2);

        J.f_x(0, 1) = p.at("omega_b");
        J.f_x(1, 1) = -p.at("D") / H2;
        J.f_y(1, 0) = -1.0 / H2;
        J.f_x(2, 2) = -1.0 / p.at("T_d0");
        J.f_x(2, 3) = 1.0 / p.at("T_d0");
        J.f_x(3, 3) = -1.0 / p.at("T_a");
        J.f_y(3, 1) = -p.at("K_a") / p.at("T_a");

        J.g_x(0, 0) = -(e_q * v_inf / x_e) * std::cos(delta);
        J.g_x(0, 2) = -(v_inf / x_e) * std::sin(delta);
        const double s = std::sqrt(e_q * e_q + v_inf * v_inf + 2.0 * e_q * v_inf * std::cos(delta));
        J.g_x(1, 0) = e_q * v_inf * std::sin(delta) / s;
        J.g_x(1, 2) = -(e_q + v_inf * std::cos(delta)) / s;
        J.g_y(0, 0) = 1.0;
        J.g_y(1, 1) = 1.0;
        return J;
    };

    // Construct the equilibrium: pick e_q, solve the swing balance for delta,
    // back out v_r and v_ref, then polish with damped Newton.
    // e_q0 = 1.6 places the electromechanical pair in the left half-plane
    // (about -0.07 +/- 12.8j); weaker excitation levels leave it unstable.
    const double e_q0 = 1.6;
    const double v_inf = model.params.at("v_inf");
    const double x_e = model.params.at("x_e");
    const double p_m = model.params.at("p_m");
    const double K_a = model.params.at("K_a");
    const double delta0 = std::asin(p_m * x_e / (e_q0 * v_inf));
    const double v_t0 =
        std::sqrt(e_q0 * e_q0 + v_inf * v_inf + 2.0 * e_q0 * v_inf * std::cos(delta0));
    model.params["v_ref"] = v_t0 + e_q0 / K_a;

    Vector x0(4), y0(2);
    x0 << delta0, 1.0, e_q0, e_q0;
    y0 << p_m, v_t0;
    find_equilibrium(model, x0, y0);
    model.x_eq = x0;
    model.y_eq = y0;
    return model;
}

}  // namespace

bool builtin_is_linear(const std::string& name) {
    if (name == "decoupled2" || name == "coupled_stiff") return true;
    if (name == "smib_avr") return false;
    throw ModelError("unknown builtin model '" + name + "'");
}

LinearDae builtin_linear(const std::string& name) {
    if (name == "decoupled2") return make_decoupled2();
    if (name == "coupled_stiff") return make_coupled_stiff();
    if (name == "smib_avr")
        throw ModelError("smib_avr is nonlinear; use builtin_nonlinear or linearize");
    throw ModelError("unknown builtin model '" + name + "'");
}

NonlinearModel builtin_nonlinear(const std::string& name) {
    if (builtin_is_linear(name)) return as_nonlinear(builtin_linear(name));
    static const NonlinearModel smib = make_smib_avr();
    return smib;
}

}  // namespace mrpencil
