#include "mrpencil/scheme.hpp"

#include <cmath>

namespace mrpencil {

std::string to_string(Method m) {
    switch (m) {
        case Method::FEM: return "FEM";
        case Method::TM: return "TM";
        case Method::BEM: return "BEM";
    }
    throw ModelError("invalid Method value");
}

std::string to_string(InterpMode m) {
    return m == InterpMode::Linear ? "linear" : "cubic_spline";
}

Method method_from_string(const std::string& s) {
    if (s == "FEM" || s == "fem") return Method::FEM;
    if (s == "TM" || s == "tm") return Method::TM;
    if (s == "BEM" || s == "bem") return Method::BEM;
    throw ModelError("unknown method '" + s + "' (expected FEM, TM, or BEM)");
}

InterpMode interp_from_string(const std::string& s) {
    if (s == "linear") return InterpMode::Linear;
    if (s == "cubic_spline" || s == "spline") return InterpMode::CubicSpline;
    throw ModelError("unknown interpolation mode '" + s + "'");
}

int SchemeSpec::ratio() const {
    if (h_f <= 0 || h_s <= 0) throw ModelError("SchemeSpec: step sizes must be positive");
    const double q = h_s / h_f;
    const double rounded = std::round(q);
    if (rounded < 1.0 || std::abs(q - rounded) > 1e-9 * q)
        throw ModelError("SchemeSpec: h_s/h_f must be a positive integer (got " +
                         std::to_string(q) + ")");
    return static_cast<int>(rounded);
}

void SchemeSpec::validate() const {
    ratio();
    if (corrector_fast == Method::FEM || corrector_slow == Method::FEM)
        throw ModelError("SchemeSpec: correctors must be implicit (TM or BEM)");
    if (epsilon <= 0) throw ModelError("SchemeSpec: epsilon must be positive");
    if (max_passes < 1) throw ModelError("SchemeSpec: max_passes must be at least 1");
}

MethodParams method_params(const SchemeSpec& scheme) {
    scheme.validate();
    MethodParams p;
    switch (scheme.predictor) {
        case Method::FEM: p.a = scheme.h_s; p.a_star = 0.0; break;
        case Method::TM: p.a = p.a_star = scheme.h_s / 2.0; break;
        case Method::BEM: p.a = 0.0; p.a_star = scheme.h_s; break;
    }
    if (scheme.corrector_fast == Method::TM) {
        p.b = p.b_star = scheme.h_f / 2.0;
    } else {
        p.b = 0.0;
        p.b_star = scheme.h_f;
    }
    if (scheme.corrector_slow == Method::TM) {
        p.c = p.c_star = scheme.h_s / 2.0;
    } else {
        p.c = 0.0;
        p.c_star = scheme.h_s;
    }
    return p;
}

CostTable factorization_cost(const SchemeSpec& scheme, const Dims& dims) {
    dims.validate();
    const int r = scheme.ratio();
    CostTable t;
    t.single_rate = {"single_rate", {{dims.n + dims.m, r}}};
    t.explicit_predictor = {"multirate_explicit_predictor",
                            {{dims.m_s, 1}, {dims.n_f + dims.m_f, r}, {dims.n_s + dims.m_s, 1}}};
    t.implicit_predictor = {"multirate_implicit_predictor",
                            {{dims.n + dims.m, 1}, {dims.n_f + dims.m_f, r}, {dims.n_s + dims.m_s, 1}}};
    return t;
}

}  // namespace mrpencil
