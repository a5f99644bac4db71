#include "mrpencil/multirate.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace mrpencil {

namespace {

constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 20;
constexpr int kNewtonStallLimit = 5;

Vector gather(const Vector& v, const std::vector<int>& idx) {
    Vector out(static_cast<int>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) out(static_cast<int>(k)) = v(idx[k]);
    return out;
}

void scatter(Vector& v, const std::vector<int>& idx, const Vector& vals) {
    for (size_t k = 0; k < idx.size(); ++k) v(idx[k]) = vals(static_cast<int>(k));
}

Matrix sub(const Matrix& M, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            out(static_cast<int>(i), static_cast<int>(j)) = M(rows[i], cols[j]);
    return out;
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Damped-honesty Newton: one factorization up front, refreshed only after
/// kNewtonStallLimit non-improving iterations. Each factorization is reported
/// through `record` so callers can account for it.
void newton_solve(const std::function<Vector(const Vector&)>& residual,
                  const std::function<Eigen::PartialPivLU<Matrix>(const Vector&)>& factor,
                  Vector& u, const std::function<void()>& record, int& iters,
                  const char* what) {
    record();
    if (u.size() == 0) return;
    Eigen::PartialPivLU<Matrix> lu = factor(u);
    double best = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        const Vector res = residual(u);
        if (!res.allFinite())
            throw NumericalError(std::string(what) + ": residual evaluation is not finite");
        const double nrm = inf_norm(res);
        if (nrm <= kNewtonTol) return;
        if (nrm < best) {
            best = nrm;
            stall = 0;
        } else if (++stall >= kNewtonStallLimit) {
            lu = factor(u);
            record();
            stall = 0;
        }
        u -= lu.solve(res);
        ++iters;
    }
    if (inf_norm(residual(u)) > kNewtonTol)
        throw NumericalError(std::string(what) + ": Newton did not converge within " +
                             std::to_string(kNewtonMaxIter) + " iterations");
}

/// Natural cubic through four uniformly spaced knots, evaluated at
/// tau in [0, h] past the third knot.
double natural_cubic_last(double y0, double y1, double y2, double y3, double h, double tau) {
    const double d1 = 6.0 * (y2 - 2.0 * y1 + y0) / (h * h);
    const double d2 = 6.0 * (y3 - 2.0 * y2 + y1) / (h * h);
    // Natural ends: M0 = M3 = 0, so 4 M1 + M2 = d1, M1 + 4 M2 = d2.
    const double M2 = (4.0 * d2 - d1) / 15.0;
    const double u = h - tau;
    return M2 * u * u * u / (6.0 * h) + (y2 - M2 * h * h / 6.0) * u / h + y3 * tau / h;
}

}  // namespace

double spline_last_segment(double y0, double y1, double y2, double y3, double h, double tau) {
    return natural_cubic_last(y0, y1, y2, y3, h, tau);
}

double Trajectory::value(const std::string& var, int k) const {
    for (size_t i = 0; i < state_names.size(); ++i)
        if (state_names[i] == var) return x.at(k)(static_cast<int>(i));
    for (size_t i = 0; i < alg_names.size(); ++i)
        if (alg_names[i] == var) return y.at(k)(static_cast<int>(i));
    throw ModelError("Trajectory: unknown variable '" + var + "'");
}

bool Trajectory::has_variable(const std::string& var) const {
    return std::find(state_names.begin(), state_names.end(), var) != state_names.end() ||
           std::find(alg_names.begin(), alg_names.end(), var) != alg_names.end();
}

std::map<int, long> Trajectory::factorization_totals() const {
    std::map<int, long> totals;
    for (const auto& meta : macro_meta)
        for (const auto& [order, count] : meta.factorizations) totals[order] += count;
    return totals;
}

Vector consistent_algebraics(const NonlinearModel& model, const Vector& x,
                             const Vector& y_guess) {
    if (model.dims.m == 0) return y_guess;
    Vector y = y_guess;
    int iters = 0;
    newton_solve([&](const Vector& u) { return model.eval_g(x, u); },
                 [&](const Vector& u) {
                     return Eigen::PartialPivLU<Matrix>(jacobian_at(model, x, u).g_y);
                 },
                 y, [] {}, iters, "consistent_algebraics");
    return y;
}

MultirateEngine::MultirateEngine(NonlinearModel model, SchemeSpec scheme, Partition partition)
    : model_(std::move(model)), scheme_(std::move(scheme)), part_(std::move(partition)) {
    scheme_.validate();
    if (part_.n() != model_.dims.n || part_.m() != model_.dims.m)
        throw ModelError("MultirateEngine: partition size does not match model dims");
    dims_ = Dims{model_.dims.n, model_.dims.m, part_.n_fast(), part_.n_slow(),
                 part_.m_fast(), part_.m_slow()};
    dims_.validate();
    mp_ = method_params(scheme_);
    for (int i = 0; i < dims_.n; ++i)
        (part_.state_class[i] == VarClass::Fast ? sf_ : ss_).push_back(i);
    for (int i = 0; i < dims_.m; ++i)
        (part_.alg_class[i] == VarClass::Fast ? af_ : as_).push_back(i);
}

void MultirateEngine::refresh_base_factorizations() {
    if (dims_.m_f == 0) {
        gffy_valid_ = true;
        return;
    }
    const JacobianBlocks J = jacobian_at(model_, base_x_, base_y_);
    gffy_lu_.compute(sub(J.g_y, af_, af_));
    gffy_valid_ = true;
}

MultirateEngine::Predicted MultirateEngine::predict(const Vector& x0, const Vector& y0) {
    return mp_.a_star == 0.0 ? predict_explicit(x0, y0) : predict_implicit(x0, y0);
}

MultirateEngine::Predicted MultirateEngine::predict_explicit(const Vector& x0, const Vector& y0) {
    if (!gffy_valid_) {
        base_x_ = x0;
        base_y_ = y0;
        refresh_base_factorizations();
    }
    Predicted pred;
    pred.x = x0 + mp_.a * model_.eval_f(x0, y0);
    pred.y = y0;
    if (meta_) meta_->factorizations.emplace_back(dims_.m_s, 1);
    if (dims_.m == 0) return pred;

    // Solve g(x^P, y) = 0 by block elimination: the fast-fast algebraic block
    // reuses the cached factorization, only the slow Schur complement is
    // factored fresh.
    const int mf = dims_.m_f, ms = dims_.m_s;
    auto make_schur = [&](const Vector& y) {
        const JacobianBlocks J = jacobian_at(model_, pred.x, y);
        Matrix g_sf_y = sub(J.g_y, as_, af_);
        Matrix g_fs_y = sub(J.g_y, af_, as_);
        Matrix H3 = sub(J.g_y, as_, as_);
        if (mf > 0) H3 -= g_sf_y * gffy_lu_.solve(g_fs_y);
        return std::tuple<Eigen::PartialPivLU<Matrix>, Matrix, Matrix>(
            Eigen::PartialPivLU<Matrix>(H3), std::move(g_sf_y), std::move(g_fs_y));
    };

    auto [h3_lu, g_sf_y, g_fs_y] = make_schur(pred.y);
    double best = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        const Vector res = model_.eval_g(pred.x, pred.y);
        if (!res.allFinite())
            throw NumericalError("predict: algebraic residual is not finite");
        const double nrm = inf_norm(res);
        if (nrm <= kNewtonTol) return pred;
        if (nrm < best) {
            best = nrm;
            stall = 0;
        } else if (++stall >= kNewtonStallLimit) {
            std::tie(h3_lu, g_sf_y, g_fs_y) = make_schur(pred.y);
            if (meta_) meta_->factorizations.emplace_back(dims_.m_s, 1);
            stall = 0;
        }
        const Vector rf = gather(res, af_);
        const Vector rs = gather(res, as_);
        Vector dy_s(ms), dy_f(mf);
        if (ms > 0) {
            Vector rhs = -rs;
            if (mf > 0) rhs += g_sf_y * gffy_lu_.solve(rf);
            dy_s = h3_lu.solve(rhs);
        }
        if (mf > 0) {
            Vector rhs = -rf;
            if (ms > 0) rhs -= g_fs_y * dy_s;
            dy_f = gffy_lu_.solve(rhs);
        }
        Vector yk = gather(pred.y, af_) + dy_f;
        scatter(pred.y, af_, yk);
        yk = gather(pred.y, as_) + dy_s;
        scatter(pred.y, as_, yk);
        ++newton_iters_;
    }
    if (inf_norm(model_.eval_g(pred.x, pred.y)) > kNewtonTol)
        throw NumericalError("predict: algebraic solve did not converge");
    return pred;
}

MultirateEngine::Predicted MultirateEngine::predict_implicit(const Vector& x0, const Vector& y0) {
    const int n = dims_.n, m = dims_.m;
    const Vector old_term = x0 + mp_.a * model_.eval_f(x0, y0);
    Vector u(n + m);
    u << x0, y0;
    auto residual = [&](const Vector& w) {
        const Vector xv = w.head(n), yv = w.tail(m);
        Vector res(n + m);
        res.head(n) = xv - old_term - mp_.a_star * model_.eval_f(xv, yv);
        res.tail(m) = model_.eval_g(xv, yv);
        return res;
    };
    auto factor = [&](const Vector& w) {
        const JacobianBlocks J = jacobian_at(model_, w.head(n), w.tail(m));
        Matrix Jm(n + m, n + m);
        Jm << Matrix::Identity(n, n) - mp_.a_star * J.f_x, -mp_.a_star * J.f_y, J.g_x, J.g_y;
        return Eigen::PartialPivLU<Matrix>(Jm);
    };
    newton_solve(residual, factor, u,
                 [&] {
                     if (meta_) meta_->factorizations.emplace_back(n + m, 1);
                 },
                 newton_iters_, "predict");
    return Predicted{u.head(n), u.tail(m)};
}

void MultirateEngine::interpolate_slow(const Vector& xs0, const Vector& ys0, const Vector& xsP,
                                       const Vector& ysP, int i, Vector& xs_i,
                                       Vector& ys_i) const {
    const double w = static_cast<double>(i) / scheme_.ratio();
    xs_i = (1.0 - w) * xs0 + w * xsP;
    ys_i = (1.0 - w) * ys0 + w * ysP;
}

void MultirateEngine::solve_fast_step(const Vector& x_prev, const Vector& y_prev, Vector& x_i,
                                      Vector& y_i) {
    const int nf = dims_.n_f, mf = dims_.m_f;
    const Vector old_term =
        gather(x_prev, sf_) + mp_.b * gather(model_.eval_f(x_prev, y_prev), sf_);
    Vector u(nf + mf);
    u << gather(x_prev, sf_), gather(y_prev, af_);

    auto assemble = [&](const Vector& w) {
        scatter(x_i, sf_, w.head(nf));
        scatter(y_i, af_, w.tail(mf));
    };
    auto residual = [&](const Vector& w) {
        assemble(w);
        Vector res(nf + mf);
        res.head(nf) =
            w.head(nf) - old_term - mp_.b_star * gather(model_.eval_f(x_i, y_i), sf_);
        res.tail(mf) = gather(model_.eval_g(x_i, y_i), af_);
        return res;
    };
    auto factor = [&](const Vector& w) {
        assemble(w);
        const JacobianBlocks J = jacobian_at(model_, x_i, y_i);
        Matrix Jm(nf + mf, nf + mf);
        Jm << Matrix::Identity(nf, nf) - mp_.b_star * sub(J.f_x, sf_, sf_),
            -mp_.b_star * sub(J.f_y, sf_, af_), sub(J.g_x, af_, sf_), sub(J.g_y, af_, af_);
        return Eigen::PartialPivLU<Matrix>(Jm);
    };
    newton_solve(residual, factor, u,
                 [&] {
                     if (meta_) meta_->factorizations.emplace_back(nf + mf, 1);
                 },
                 newton_iters_, "solve_fast_step");
    assemble(u);
}

void MultirateEngine::solve_slow_step(const Vector& x_macro0, const Vector& y_macro0,
                                      Vector& x_r, Vector& y_r) {
    const int ns = dims_.n_s, ms = dims_.m_s;
    const Vector old_term =
        gather(x_macro0, ss_) + mp_.c * gather(model_.eval_f(x_macro0, y_macro0), ss_);
    Vector u(ns + ms);
    u << gather(x_r, ss_), gather(y_r, as_);

    auto assemble = [&](const Vector& w) {
        scatter(x_r, ss_, w.head(ns));
        scatter(y_r, as_, w.tail(ms));
    };
    auto residual = [&](const Vector& w) {
        assemble(w);
        Vector res(ns + ms);
        res.head(ns) =
            w.head(ns) - old_term - mp_.c_star * gather(model_.eval_f(x_r, y_r), ss_);
        res.tail(ms) = gather(model_.eval_g(x_r, y_r), as_);
        return res;
    };
    auto factor = [&](const Vector& w) {
        assemble(w);
        const JacobianBlocks J = jacobian_at(model_, x_r, y_r);
        Matrix Jm(ns + ms, ns + ms);
        Jm << Matrix::Identity(ns, ns) - mp_.c_star * sub(J.f_x, ss_, ss_),
            -mp_.c_star * sub(J.f_y, ss_, as_), sub(J.g_x, as_, ss_), sub(J.g_y, as_, as_);
        return Eigen::PartialPivLU<Matrix>(Jm);
    };
    newton_solve(residual, factor, u,
                 [&] {
                     if (meta_) meta_->factorizations.emplace_back(ns + ms, 1);
                 },
                 newton_iters_, "solve_slow_step");
    assemble(u);
}

Trajectory MultirateEngine::run(const Vector& x0, const Vector& y0, double t_end,
                                const std::vector<Event>& events) {
    if (x0.size() != dims_.n || y0.size() != dims_.m)
        throw ModelError("run: initial point size does not match model dims");
    const int r = scheme_.ratio();
    const double h_s = scheme_.h_s;
    const long n_macro = std::lround(t_end / h_s);
    if (n_macro < 1 || std::abs(n_macro * h_s - t_end) > 1e-6 * h_s)
        throw ModelError("run: t_end must be a positive multiple of h_s");

    std::multimap<long, const Event*> snapped;
    for (const auto& ev : events) {
        long k = std::lround(ev.t / h_s);
        k = std::clamp(k, 0L, n_macro - 1);
        snapped.emplace(k, &ev);
    }

    Trajectory traj;
    traj.state_names = model_.state_names;
    traj.alg_names = model_.alg_names;
    traj.h_f = scheme_.h_f;
    traj.r = r;

    Vector x = x0, y = y0;
    base_x_ = x;
    base_y_ = y;
    refresh_base_factorizations();

    auto push_sample = [&](double t, const Vector& xs, const Vector& ys) {
        traj.t.push_back(t);
        traj.x.push_back(xs);
        traj.y.push_back(ys);
        traj.residual_slow.push_back(gather(model_.eval_g(xs, ys), as_).norm());
    };
    push_sample(0.0, x, y);

    // Slow boundary values at t - 2 h_s and t - h_s, for the spline knots.
    // The pre-simulation value is held at the initial point, so one knot is
    // available immediately; the very first macro step still falls back.
    std::deque<std::pair<Vector, Vector>> history;
    history.emplace_back(gather(x, ss_), gather(y, as_));

    for (long j = 0; j < n_macro; ++j) {
        const double t0 = j * h_s;
        auto [lo, hi] = snapped.equal_range(j);
        if (lo != hi) {
            for (auto it = lo; it != hi; ++it)
                model_ = model_.with_parameter(it->second->parameter, it->second->value);
            // States carry over; algebraics are re-solved and the fast
            // algebraic factorization cache is rebuilt. The spline history is
            // discarded: pre-event knots no longer describe the dynamics.
            y = consistent_algebraics(model_, x, y);
            traj.y.back() = y;
            traj.residual_slow.back() = gather(model_.eval_g(x, y), as_).norm();
            base_x_ = x;
            base_y_ = y;
            refresh_base_factorizations();
            // Pre-event knots no longer describe the dynamics; restart the
            // spline history from the post-event point.
            history.clear();
            history.emplace_back(gather(x, ss_), gather(y, as_));
        }

        StepMeta meta;
        meta_ = &meta;
        newton_iters_ = 0;

        const Vector xs0 = gather(x, ss_), ys0 = gather(y, as_);
        Predicted pred = predict(x, y);
        Vector xsP = gather(pred.x, ss_), ysP = gather(pred.y, as_);

        const bool want_spline = scheme_.interpolation == InterpMode::CubicSpline;
        const bool use_spline = want_spline && history.size() >= 2;
        meta.interp_fallback = want_spline && !use_spline;

        std::vector<Vector> xm(r + 1), ym(r + 1);
        for (int pass = 1;; ++pass) {
            xm[0] = x;
            ym[0] = y;
            for (int i = 1; i <= r; ++i) {
                Vector xi = xm[i - 1], yi = ym[i - 1];
                Vector xs_i(dims_.n_s), ys_i(dims_.m_s);
                if (use_spline) {
                    const double tau = i * scheme_.h_f;
                    for (int c = 0; c < dims_.n_s; ++c)
                        xs_i(c) = natural_cubic_last(history[0].first(c), history[1].first(c),
                                                     xs0(c), xsP(c), h_s, tau);
                    for (int c = 0; c < dims_.m_s; ++c)
                        ys_i(c) = natural_cubic_last(history[0].second(c), history[1].second(c),
                                                     ys0(c), ysP(c), h_s, tau);
                } else {
                    interpolate_slow(xs0, ys0, xsP, ysP, i, xs_i, ys_i);
                }
                scatter(xi, ss_, xs_i);
                scatter(yi, as_, ys_i);
                solve_fast_step(xm[i - 1], ym[i - 1], xi, yi);
                xm[i] = std::move(xi);
                ym[i] = std::move(yi);
            }
            solve_slow_step(x, y, xm[r], ym[r]);

            const Vector xsC = gather(xm[r], ss_), ysC = gather(ym[r], as_);
            const double mismatch = std::max(inf_norm(xsC - xsP), inf_norm(ysC - ysP));
            meta.final_mismatch = mismatch;
            meta.passes = pass;
            if (mismatch <= scheme_.epsilon || pass >= scheme_.max_passes) {
                meta.pass_cap_exceeded = mismatch > scheme_.epsilon;
                break;
            }
            xsP = xsC;
            ysP = ysC;
        }

        for (int i = 1; i <= r; ++i) push_sample(t0 + i * scheme_.h_f, xm[i], ym[i]);
        x = xm[r];
        y = ym[r];

        meta.newton_iterations = newton_iters_;
        meta_ = nullptr;
        traj.macro_meta.push_back(meta);

        history.emplace_back(xs0, ys0);
        if (history.size() > 2) history.pop_front();
    }
    return traj;
}

Trajectory run_multirate(const NonlinearModel& model, const SchemeSpec& scheme,
                         const Partition& partition, double t_end,
                         const std::vector<Event>& events, const Vector& x0, const Vector& y0) {
    MultirateEngine engine(model, scheme, partition);
    return engine.run(x0, y0, t_end, events);
}

Trajectory run_multirate(const NonlinearModel& model, const SchemeSpec& scheme,
                         const Partition& partition, double t_end) {
    return run_multirate(model, scheme, partition, t_end, model.events, model.x_eq, model.y_eq);
}

Trajectory run_reference(const NonlinearModel& model, double h_ref, double t_end,
                         const std::vector<Event>& events, const Vector& x0, const Vector& y0) {
    if (h_ref <= 0) throw ModelError("run_reference: h_ref must be positive");
    const int n = model.dims.n, m = model.dims.m;
    const long n_steps = std::lround(t_end / h_ref);
    if (n_steps < 1 || std::abs(n_steps * h_ref - t_end) > 1e-6 * h_ref)
        throw ModelError("run_reference: t_end must be a positive multiple of h_ref");

    std::multimap<long, const Event*> snapped;
    for (const auto& ev : events) {
        long k = std::lround(ev.t / h_ref);
        k = std::clamp(k, 0L, n_steps - 1);
        snapped.emplace(k, &ev);
    }

    NonlinearModel mdl = model;
    Trajectory traj;
    traj.state_names = mdl.state_names;
    traj.alg_names = mdl.alg_names;
    traj.h_f = h_ref;
    traj.r = 1;

    Vector x = x0, y = y0;
    auto push_sample = [&](double t) {
        traj.t.push_back(t);
        traj.x.push_back(x);
        traj.y.push_back(y);
        traj.residual_slow.push_back(mdl.eval_g(x, y).norm());
    };
    push_sample(0.0);

    for (long k = 0; k < n_steps; ++k) {
        auto [lo, hi] = snapped.equal_range(k);
        if (lo != hi) {
            for (auto it = lo; it != hi; ++it)
                mdl = mdl.with_parameter(it->second->parameter, it->second->value);
            y = consistent_algebraics(mdl, x, y);
            traj.y.back() = y;
            traj.residual_slow.back() = mdl.eval_g(x, y).norm();
        }

        StepMeta meta;
        int iters = 0;
        const Vector old_term = x + 0.5 * h_ref * mdl.eval_f(x, y);
        Vector u(n + m);
        u << x, y;
        auto residual = [&](const Vector& w) {
            const Vector xv = w.head(n), yv = w.tail(m);
            Vector res(n + m);
            res.head(n) = xv - old_term - 0.5 * h_ref * mdl.eval_f(xv, yv);
            res.tail(m) = mdl.eval_g(xv, yv);
            return res;
        };
        auto factor = [&](const Vector& w) {
            const JacobianBlocks J = jacobian_at(mdl, w.head(n), w.tail(m));
            Matrix Jm(n + m, n + m);
            Jm << Matrix::Identity(n, n) - 0.5 * h_ref * J.f_x, -0.5 * h_ref * J.f_y, J.g_x,
                J.g_y;
            return Eigen::PartialPivLU<Matrix>(Jm);
        };
        newton_solve(residual, factor, u,
                     [&] { meta.factorizations.emplace_back(n + m, 1); }, iters,
                     "run_reference");
        x = u.head(n);
        y = u.tail(m);
        meta.newton_iterations = iters;
        traj.macro_meta.push_back(meta);
        push_sample((k + 1) * h_ref);
    }
    return traj;
}

Trajectory run_reference(const NonlinearModel& model, double h_ref, double t_end) {
    return run_reference(model, h_ref, t_end, model.events, model.x_eq, model.y_eq);
}

ErrorSeries trajectory_error(const Trajectory& traj, const Trajectory& ref,
                             const std::string& variable) {
    if (!traj.has_variable(variable) || !ref.has_variable(variable))
        throw ModelError("trajectory_error: unknown variable '" + variable + "'");
    ErrorSeries series;
    for (int k = 0; k < traj.samples(); k += traj.r) {
        const double t = traj.t[k];
        const long idx = std::lround(t / ref.h_f);
        if (idx < 0 || idx >= ref.samples() ||
            std::abs(ref.t[idx] - t) > 1e-9 * std::max(1.0, std::abs(t)))
            throw ModelError("trajectory_error: reference grid does not cover t = " +
                             std::to_string(t));
        series.push_back({t, std::abs(traj.value(variable, k) -
                                      ref.value(variable, static_cast<int>(idx)))});
    }
    return series;
}

double verify_pencil_consistency(const LinearDae& lin, const Partition& partition,
                                 SchemeSpec scheme, int steps) {
    const PencilPair pair = assemble_pencil(apply_partition(lin, partition), scheme);
    return verify_pencil_consistency(lin, partition, scheme, steps, pair);
}

double verify_pencil_consistency(const LinearDae& lin, const Partition& partition,
                                 SchemeSpec scheme, int steps, const PencilPair& pair) {
    if (steps < 1) throw ModelError("verify_pencil_consistency: steps must be positive");
    scheme.interpolation = InterpMode::Linear;
    scheme.epsilon = std::numeric_limits<double>::infinity();  // literal single pass
    scheme.max_passes = 1;
    const int r = scheme.ratio();
    const int n = lin.dims.n, m = lin.dims.m, N = n + m;

    NonlinearModel model = as_nonlinear(lin);
    // Deterministic non-equilibrium start exciting every mode.
    Vector x0(n);
    for (int k = 0; k < n; ++k) x0(k) = std::cos(1.7 * (k + 1)) + 0.25;
    Vector y0 = consistent_algebraics(model, x0, Vector::Zero(m));

    MultirateEngine engine(model, scheme, partition);
    const Trajectory traj = engine.run(x0, y0, steps * scheme.h_s, {});

    const std::vector<int> so = partition.state_order();
    const std::vector<int> ao = partition.alg_order();
    auto block = [&](int sample) {
        Vector v(N);
        for (int a = 0; a < n; ++a) v(a) = traj.x[sample](so[a]);
        for (int a = 0; a < m; ++a) v(n + a) = traj.y[sample](ao[a]);
        return v;
    };

    double worst = 0.0;
    for (int j = 0; j < steps; ++j) {
        Vector yhat(r * N), ycheck(r * N);
        for (int k = 1; k <= r; ++k) {
            yhat.segment((k - 1) * N, N) = block(j * r + (r - k + 1));
            ycheck.segment((k - 1) * N, N) = block(j * r + (r - k));
        }
        const Vector res = pair.F * yhat - pair.G * ycheck;
        worst = std::max(worst, inf_norm(res) / std::max(1.0, inf_norm(yhat)));
    }
    return worst;
}

}  // namespace mrpencil
