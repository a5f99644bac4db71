#pragma once

#include "mrpencil/types.hpp"

namespace mrpencil {

enum class Method { FEM, TM, BEM };
enum class InterpMode { Linear, CubicSpline };

std::string to_string(Method m);
std::string to_string(InterpMode m);
Method method_from_string(const std::string& s);
InterpMode interp_from_string(const std::string& s);

/// User-facing multirate scheme choice.
struct SchemeSpec {
    Method predictor = Method::TM;
    Method corrector_fast = Method::TM;  // TM or BEM
    Method corrector_slow = Method::TM;  // TM or BEM
    InterpMode interpolation = InterpMode::Linear;
    double h_f = 1e-3;
    double h_s = 1e-2;
    double epsilon = 1e-6;  // step-5 convergence tolerance
    int max_passes = 10;

    /// Step ratio h_s/h_f; must be a positive integer to 1e-9 relative.
    int ratio() const;
    void validate() const;
};

/// Quadrature weights of the parameterized predictor/corrector family:
/// starred coefficients weight the new point, unstarred the old one.
struct MethodParams {
    double a = 0, a_star = 0;  // predictor, a + a* = h_s
    double b = 0, b_star = 0;  // fast corrector, b + b* = h_f
    double c = 0, c_star = 0;  // slow corrector, c + c* = h_s
};

MethodParams method_params(const SchemeSpec& scheme);

/// One row of the per-h_s Jacobian factorization count table.
struct CostRow {
    std::string label;
    std::vector<std::pair<int, int>> factorizations;  // (matrix order, count)
};

struct CostTable {
    CostRow single_rate;        // r factorizations of order n+m at step h_f
    CostRow explicit_predictor; // 1 of order m_s, r of order n_f+m_f, 1 of order n_s+m_s
    CostRow implicit_predictor; // 1 of order n+m, r of order n_f+m_f, 1 of order n_s+m_s

    /// Row matching the scheme's predictor type.
    const CostRow& scheme_row(Method predictor) const {
        return predictor == Method::FEM ? explicit_predictor : implicit_predictor;
    }
};

CostTable factorization_cost(const SchemeSpec& scheme, const Dims& dims);

}  // namespace mrpencil
