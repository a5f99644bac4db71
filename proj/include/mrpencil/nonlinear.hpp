#pragma once

#include <functional>
#include <map>
#include <optional>

#include "mrpencil/linear_dae.hpp"

namespace mrpencil {

/// Parameter step applied during a simulation (snapped to a macro boundary).
struct Event {
    double t = 0.0;
    std::string parameter;
    double value = 0.0;
};

struct JacobianBlocks {
    Matrix f_x, f_y, g_x, g_y;
};

using ParamMap = std::map<std::string, double>;

/// Nonlinear DAE x' = f(x, y), 0 = g(x, y) with a stored equilibrium.
/// Evaluators are pure; events are applied by the simulator through
/// with_parameter(), never by mutating a shared model.
struct NonlinearModel {
    std::string name;
    Dims dims;
    std::vector<std::string> state_names;
    std::vector<std::string> alg_names;
    ParamMap params;
    std::vector<Event> events;
    Vector x_eq;
    Vector y_eq;

    std::function<Vector(const Vector&, const Vector&, const ParamMap&)> f;
    std::function<Vector(const Vector&, const Vector&, const ParamMap&)> g;
    // Analytic Jacobians; empty function means finite differences.
    std::function<JacobianBlocks(const Vector&, const Vector&, const ParamMap&)> jacobian;

    Vector eval_f(const Vector& x, const Vector& y) const { return f(x, y, params); }
    Vector eval_g(const Vector& x, const Vector& y) const { return g(x, y, params); }

    NonlinearModel with_parameter(const std::string& key, double value) const;

    /// Max of the infinity norms of f and g at (x, y).
    double residual_inf(const Vector& x, const Vector& y) const;
};

struct LinearizeResult {
    LinearDae dae;
    bool off_equilibrium = false;
};

/// Jacobians at a point; analytic when the model provides them, central
/// finite differences with step 1e-7*max(1,|v|) otherwise.
JacobianBlocks jacobian_at(const NonlinearModel& model, const Vector& x, const Vector& y);

LinearizeResult linearize(const NonlinearModel& model, const Vector& x, const Vector& y);

/// Damped Newton on (f, g) = 0 from a seed; throws NumericalError on failure.
void find_equilibrium(const NonlinearModel& model, Vector& x, Vector& y,
                      double tol = 1e-12, int max_iter = 100);

/// Wrap an already-linear model so the nonlinear machinery can run it.
NonlinearModel as_nonlinear(const LinearDae& lin);

/// Bundled models: "decoupled2", "coupled_stiff" (linear), "smib_avr" (nonlinear).
bool builtin_is_linear(const std::string& name);
LinearDae builtin_linear(const std::string& name);
NonlinearModel builtin_nonlinear(const std::string& name);

}  // namespace mrpencil
