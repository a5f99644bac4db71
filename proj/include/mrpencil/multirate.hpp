#pragma once

#include <deque>

#include "mrpencil/nonlinear.hpp"
#include "mrpencil/pencil.hpp"
#include "mrpencil/scheme.hpp"

namespace mrpencil {

/// Per-macro-step bookkeeping.
struct StepMeta {
    int passes = 1;
    int newton_iterations = 0;
    std::vector<std::pair<int, int>> factorizations;  // (order, count)
    bool interp_fallback = false;   // spline cold start served linearly
    bool pass_cap_exceeded = false;
    double final_mismatch = 0.0;    // step-5 mismatch on exit
};

/// Fast-grid samples of a run, in original variable order, plus the
/// per-fast-step Euclidean norm of the slow algebraic residual.
struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> x;
    std::vector<Vector> y;
    std::vector<double> residual_slow;
    std::vector<StepMeta> macro_meta;
    std::vector<std::string> state_names;
    std::vector<std::string> alg_names;
    double h_f = 0;
    int r = 1;  // samples per macro step (1 for reference runs)

    int samples() const { return static_cast<int>(t.size()); }
    /// Value of a named variable at sample k; throws on unknown name.
    double value(const std::string& var, int k) const;
    bool has_variable(const std::string& var) const;

    /// Total recorded factorizations aggregated by matrix order.
    std::map<int, long> factorization_totals() const;
};

struct ErrorPoint {
    double t = 0;
    double abs_error = 0;
};
using ErrorSeries = std::vector<ErrorPoint>;

/// Solve g(x, y) = 0 for y with x held fixed (Newton).
Vector consistent_algebraics(const NonlinearModel& model, const Vector& x, const Vector& y_guess);

/// Natural cubic through four uniformly spaced knots (y0..y3, spacing h),
/// evaluated at tau in [0, h] past the third knot. This is the spline kernel
/// the simulator uses for slow-variable interpolation.
double spline_last_segment(double y0, double y1, double y2, double y3, double h, double tau);

/// Literal implementation of the predict / interpolate / fast / slow /
/// compare multirate loop.
class MultirateEngine {
public:
    MultirateEngine(NonlinearModel model, SchemeSpec scheme, Partition partition);

    struct Predicted {
        Vector x;
        Vector y;
    };

    /// Step-1 prediction at t + h_s from a consistent point. Explicit
    /// predictors extrapolate the states and re-solve the algebraics; implicit
    /// ones solve the parameterized predictor equations jointly with g = 0.
    Predicted predict(const Vector& x0, const Vector& y0);

    /// Interpolated slow states/algebraics at t + i h_f, i = 0..r.
    void interpolate_slow(const Vector& xs0, const Vector& ys0, const Vector& xsP,
                          const Vector& ysP, int i, Vector& xs_i, Vector& ys_i) const;

    /// TM/BEM corrector solve of the fast subsystem at one fast step.
    /// Slow entries of x_i/y_i are inputs; fast entries are overwritten.
    void solve_fast_step(const Vector& x_prev, const Vector& y_prev, Vector& x_i, Vector& y_i);

    /// Corrector solve of the slow subsystem at t + h_s; fast entries of
    /// x_r/y_r are inputs, slow entries are overwritten.
    void solve_slow_step(const Vector& x_macro0, const Vector& y_macro0, Vector& x_r, Vector& y_r);

    Trajectory run(const Vector& x0, const Vector& y0, double t_end,
                   const std::vector<Event>& events = {});

    const Partition& partition() const { return part_; }
    const Dims& dims() const { return dims_; }
    const NonlinearModel& model() const { return model_; }

private:
    friend class SlowHistory;
    void refresh_base_factorizations();
    Predicted predict_explicit(const Vector& x0, const Vector& y0);
    Predicted predict_implicit(const Vector& x0, const Vector& y0);

    NonlinearModel model_;
    SchemeSpec scheme_;
    Partition part_;
    Dims dims_;
    MethodParams mp_;
    std::vector<int> sf_, ss_, af_, as_;  // fast/slow index lists

    // Cached at run start and after events; the explicit predictor's
    // algebraic solve reuses it instead of refactoring the fast block.
    Eigen::PartialPivLU<Matrix> gffy_lu_;
    bool gffy_valid_ = false;
    Vector base_x_, base_y_;  // point the cache was built at

    StepMeta* meta_ = nullptr;  // active macro step, for counting
    int newton_iters_ = 0;
};

/// Full multirate run from the model equilibrium (or a given start).
/// Returns trajectory plus residual series (folded into Trajectory).
Trajectory run_multirate(const NonlinearModel& model, const SchemeSpec& scheme,
                         const Partition& partition, double t_end,
                         const std::vector<Event>& events, const Vector& x0, const Vector& y0);
Trajectory run_multirate(const NonlinearModel& model, const SchemeSpec& scheme,
                         const Partition& partition, double t_end);

/// Single-rate trapezoidal reference at step h_ref on the unpartitioned DAE.
Trajectory run_reference(const NonlinearModel& model, double h_ref, double t_end,
                         const std::vector<Event>& events, const Vector& x0, const Vector& y0);
Trajectory run_reference(const NonlinearModel& model, double h_ref, double t_end);

/// |traj - ref| for one named variable on traj's macro grid.
ErrorSeries trajectory_error(const Trajectory& traj, const Trajectory& ref,
                             const std::string& variable);

/// Max over macro steps of ||F yhat - G ycheck||_inf / max(1, ||yhat||_inf)
/// for a literal single-pass linear run stacked per the pencil layout.
double verify_pencil_consistency(const LinearDae& lin, const Partition& partition,
                                 SchemeSpec scheme, int steps);

/// Same, but against caller-supplied pencil matrices (sensitivity checks).
double verify_pencil_consistency(const LinearDae& lin, const Partition& partition,
                                 SchemeSpec scheme, int steps, const PencilPair& pair);

}  // namespace mrpencil
