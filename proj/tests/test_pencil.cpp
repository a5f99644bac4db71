#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mrpencil/multirate.hpp"
#include "mrpencil/pencil.hpp"

using namespace mrpencil;

namespace {

double rho(Method m, double hl) {
    switch (m) {
        case Method::FEM: return 1.0 + hl;
        case Method::TM: return (1.0 + hl / 2.0) / (1.0 - hl / 2.0);
        case Method::BEM: return 1.0 / (1.0 - hl);
    }
    return 0.0;
}

SchemeSpec make_scheme(Method p, Method cf, Method cs, double h_f, int r,
                       InterpMode interp = InterpMode::Linear) {
    SchemeSpec s;
    s.predictor = p;
    s.corrector_fast = cf;
    s.corrector_slow = cs;
    s.interpolation = interp;
    s.h_f = h_f;
    s.h_s = h_f * r;
    return s;
}

Partition split_first_fast() {
    Partition part;
    part.state_class = {VarClass::Fast, VarClass::Slow};
    part.alg_class = {VarClass::Fast, VarClass::Slow};
    return part;
}

/// Scalar test model x' = -x with no algebraic variables.
LinearDae scalar_decay() {
    LinearDae lin;
    lin.dims = Dims{1, 0, 1, 0, 0, 0};
    lin.f_x = -Matrix::Ones(1, 1);
    lin.f_y = Matrix(1, 0);
    lin.g_x = Matrix(0, 1);
    lin.g_y = Matrix(0, 0);
    lin.state_names = {"x"};
    lin.name = "scalar_decay";
    return lin;
}

std::vector<Complex> finite_nonzero(const PencilSpectrum& sp) {
    std::vector<Complex> out;
    for (Complex z : sp.z)
        if (std::abs(z) > 1e-12) out.push_back(z);
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        if (std::abs(a.real() - b.real()) > 1e-13) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

}  // namespace

TEST_CASE("method_params coefficient mapping") {
    SchemeSpec fem = make_scheme(Method::FEM, Method::TM, Method::TM, 0.005, 10);
    MethodParams mp = method_params(fem);
    CHECK(mp.a == doctest::Approx(0.05));
    CHECK(mp.a_star == 0.0);

    SchemeSpec tm = make_scheme(Method::TM, Method::TM, Method::TM, 0.001, 10);
    mp = method_params(tm);
    CHECK(mp.a == doctest::Approx(0.005));
    CHECK(mp.a_star == doctest::Approx(0.005));
    CHECK(mp.b == doctest::Approx(0.0005));
    CHECK(mp.b_star == doctest::Approx(0.0005));
    CHECK(mp.c == doctest::Approx(0.005));
    CHECK(mp.c_star == doctest::Approx(0.005));

    SchemeSpec bem = make_scheme(Method::BEM, Method::BEM, Method::BEM, 0.001, 10);
    mp = method_params(bem);
    CHECK(mp.a == 0.0);
    CHECK(mp.b == 0.0);
    CHECK(mp.c == 0.0);
    CHECK(mp.a_star == doctest::Approx(0.01));
    CHECK(mp.b_star == doctest::Approx(0.001));
    CHECK(mp.c_star == doctest::Approx(0.01));
}

TEST_CASE("scheme validation") {
    SchemeSpec s = make_scheme(Method::TM, Method::FEM, Method::TM, 1e-3, 10);
    CHECK_THROWS_AS(s.validate(), ModelError);
    SchemeSpec ratio = make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 10);
    ratio.h_s = 0.0105;
    CHECK_THROWS_AS(ratio.validate(), ModelError);
    CHECK(make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 7).ratio() == 7);
}

TEST_CASE("assemble_pencil satisfies the trajectory oracle on decoupled2") {
    LinearDae lin = builtin_linear("decoupled2");
    SchemeSpec scheme = make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 2);
    PencilPair pair = assemble_pencil(apply_partition(lin, split_first_fast()), scheme);
    CHECK(pair.F.rows() == 8);
    CHECK(pair.G.rows() == 8);
    CHECK(verify_pencil_consistency(lin, split_first_fast(), scheme, 20) <= 1e-10);
}

TEST_CASE("assemble_pencil rejects spline interpolation and r < 1") {
    LinearDae lin = builtin_linear("decoupled2");
    PartitionedLinearDae pdae = apply_partition(lin, split_first_fast());
    SchemeSpec spline =
        make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 5, InterpMode::CubicSpline);
    CHECK_THROWS_AS(assemble_pencil(pdae, spline), ModelError);
    SchemeSpec bad = make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 5);
    bad.h_s = 0.5e-3;
    CHECK_THROWS_AS(assemble_pencil(pdae, bad), ModelError);
}

TEST_CASE("all-fast partition reproduces the single-rate recurrence") {
    LinearDae lin = builtin_linear("decoupled2");
    const double h_f = 1e-3;
    SchemeSpec scheme = make_scheme(Method::TM, Method::TM, Method::TM, h_f, 3);
    PencilPair pair = assemble_pencil(apply_partition(lin, Partition::all_fast(2, 2)), scheme);
    PencilSpectrum sp = solve_pencil(pair);
    const double r1 = rho(Method::TM, h_f * -50.0);
    const double r2 = rho(Method::TM, h_f * -1.0);
    for (Complex z : finite_nonzero(sp)) {
        const double d = std::min(std::abs(z - Complex(r1, 0)), std::abs(z - Complex(r2, 0)));
        CHECK(d <= 1e-9);
    }
    CHECK(finite_nonzero(sp).size() == 6);  // state rows, multiplicity r each
}

TEST_CASE("solve_pencil trivial diagonal pencils") {
    PencilPair pair;
    pair.F = Matrix::Identity(2, 2);
    pair.G = Matrix::Zero(2, 2);
    pair.G(0, 0) = 0.5;
    pair.G(1, 1) = 0.9;
    pair.h_f = 1.0;
    pair.r = 1;
    PencilSpectrum sp = solve_pencil(pair);
    auto z = finite_nonzero(sp);
    REQUIRE(z.size() == 2);
    CHECK(std::abs(z[0] - Complex(0.5, 0)) <= 1e-12);
    CHECK(std::abs(z[1] - Complex(0.9, 0)) <= 1e-12);
    CHECK(sp.infinite_count == 0);

    PencilPair sing;
    sing.F = Matrix::Zero(2, 2);
    sing.F(0, 0) = 1.0;
    sing.G = Matrix::Identity(2, 2);
    sing.h_f = 1.0;
    sing.r = 1;
    PencilSpectrum sp2 = solve_pencil(sing);
    REQUIRE(sp2.z.size() == 1);
    CHECK(std::abs(sp2.z[0] - Complex(1, 0)) <= 1e-12);
    CHECK(sp2.infinite_count == 1);
}

TEST_CASE("decoupled2 fast mode matches the analytic amplification factor") {
    LinearDae lin = builtin_linear("decoupled2");
    const double h_f = 1e-3;
    SchemeSpec scheme = make_scheme(Method::TM, Method::TM, Method::TM, h_f, 10);
    PencilSpectrum sp =
        solve_pencil(assemble_pencil(apply_partition(lin, split_first_fast()), scheme));
    const double zf = rho(Method::TM, h_f * -50.0);
    double best = 1e9;
    for (Complex z : sp.z) best = std::min(best, std::abs(z - Complex(zf, 0)));
    CHECK(best <= 1e-10);
}

TEST_CASE("decoupled exactness for the BEM corrector too") {
    LinearDae lin = builtin_linear("decoupled2");
    const double h_f = 1e-3;
    SchemeSpec scheme = make_scheme(Method::TM, Method::BEM, Method::TM, h_f, 5);
    PencilSpectrum sp =
        solve_pencil(assemble_pencil(apply_partition(lin, split_first_fast()), scheme));
    const double zf = rho(Method::BEM, h_f * -50.0);
    double best = 1e9;
    for (Complex z : sp.z) best = std::min(best, std::abs(z - Complex(zf, 0)));
    CHECK(best <= 1e-10);
}

TEST_CASE("deformation_report exact exponential gives zero deformation") {
    Matrix A = -Matrix::Ones(1, 1);
    ModeSet modes = eig_reduced(A);
    PencilPair pair;
    pair.F = Matrix::Ones(1, 1);
    pair.G = Matrix::Ones(1, 1) * std::exp(-0.1);
    pair.h_f = 0.1;
    pair.r = 1;
    DeformationReport rep = deformation_report(modes, solve_pencil(pair), 0.1);
    REQUIRE(rep.matches.size() == 1);
    CHECK(rep.matches[0].rel_deform <= 1e-12);
    CHECK(rep.stable);
}

TEST_CASE("single-rate TM deformation on x' = -x at h = 0.1") {
    LinearDae lin = scalar_decay();
    const double h = 0.1;
    SchemeSpec scheme = make_scheme(Method::TM, Method::TM, Method::TM, h, 1);
    PencilPair pair = assemble_pencil(apply_partition(lin, Partition::all_fast(1, 0)), scheme);
    PencilSpectrum sp = solve_pencil(pair);
    REQUIRE(sp.z.size() == 1);
    CHECK(std::abs(sp.z[0] - Complex(0.9047619048, 0)) <= 1e-9);
    ModeSet modes = eig_reduced(lin.f_x);
    DeformationReport rep = deformation_report(modes, sp, h);
    REQUIRE(rep.matches.size() == 1);
    const double s_hat = std::log(rho(Method::TM, -h)) / h;
    CHECK(std::abs(rep.matches[0].s_hat.real() - s_hat) <= 1e-12);
    CHECK(rep.matches[0].s_hat.real() == doctest::Approx(-1.0008346).epsilon(1e-6));
    CHECK(rep.matches[0].rel_deform == doctest::Approx(8.3459e-4).epsilon(1e-3));
}

TEST_CASE("decoupled2 fast-mode deformation at h_f = 1e-3, r = 10") {
    LinearDae lin = builtin_linear("decoupled2");
    const double h_f = 1e-3;
    SchemeSpec scheme = make_scheme(Method::TM, Method::TM, Method::TM, h_f, 10);
    ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    DeformationReport rep = deformation_report(
        modes, solve_pencil(assemble_pencil(apply_partition(lin, split_first_fast()), scheme)),
        h_f);
    const ModeMatch* fast = nullptr;
    for (const auto& m : rep.matches)
        if (std::abs(m.s - Complex(-50, 0)) < 1.0) fast = &m;
    REQUIRE(fast);
    const double s_hat = std::log(rho(Method::TM, -0.05)) / h_f;
    CHECK(std::abs(fast->s_hat.real() - s_hat) <= 1e-7 * std::abs(s_hat));
    CHECK(fast->rel_deform == doctest::Approx(2.083e-4).epsilon(1e-2));
}

TEST_CASE("r = 1 with matching correctors equals the single-rate pencil") {
    for (const char* name : {"decoupled2", "coupled_stiff"}) {
        LinearDae lin = builtin_linear(name);
        for (Method m : {Method::TM, Method::BEM}) {
            const double h = 1e-3;
            SchemeSpec multi = make_scheme(m, m, m, h, 1);
            PencilSpectrum sp_multi =
                solve_pencil(assemble_pencil(apply_partition(lin, split_first_fast()), multi));
            SchemeSpec single = make_scheme(m, m, m, h, 1);
            PencilSpectrum sp_single =
                solve_pencil(assemble_pencil(apply_partition(lin, Partition::all_fast(2, 2)), single));
            auto za = finite_nonzero(sp_multi);
            auto zb = finite_nonzero(sp_single);
            REQUIRE(za.size() == zb.size());
            for (size_t i = 0; i < za.size(); ++i) CHECK(std::abs(za[i] - zb[i]) <= 1e-9);
        }
    }
}

TEST_CASE("spectra of real pencils are conjugate closed") {
    NonlinearModel smib = builtin_nonlinear("smib_avr");
    LinearDae lin = linearize(smib, smib.x_eq, smib.y_eq).dae;
    Partition part = pf_partition(lin, 20.0);
    SchemeSpec scheme = make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 5);
    PencilSpectrum sp = solve_pencil(assemble_pencil(apply_partition(lin, part), scheme));
    for (Complex z : sp.z) {
        double best = 1e9;
        for (Complex w : sp.z) best = std::min(best, std::abs(w - std::conj(z)));
        CHECK(best <= 1e-9 * std::max(1.0, std::abs(z)));
    }
}

TEST_CASE("sweep_hf convergence and consistency") {
    LinearDae lin = builtin_linear("coupled_stiff");
    Partition part = split_first_fast();
    SchemeSpec tmpl = make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 10);
    std::vector<double> grid = {1e-3, 5e-4, 2e-4, 1e-4};
    auto rows = sweep_hf(lin, part, tmpl, grid, 10);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) CHECK(row.error.empty());
    CHECK(rows.back().dominant_rel_deform < rows.front().dominant_rel_deform);
    CHECK(rows.back().stable);

    auto single = sweep_hf(lin, part, tmpl, {1e-3}, 10);
    REQUIRE(single.size() == 1);
    ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    DeformationReport direct = deformation_report(
        modes, solve_pencil(assemble_pencil(apply_partition(lin, part), tmpl)), 1e-3);
    REQUIRE(direct.dominant());
    CHECK(single[0].dominant_rel_deform ==
          doctest::Approx(direct.dominant()->rel_deform).epsilon(1e-12));
    CHECK(single[0].spectral_radius == doctest::Approx(direct.spectral_radius).epsilon(1e-12));
}

TEST_CASE("sweep_hf: FEM-predictor instability on an oscillatory model, TM stays stable") {
    // coupled_stiff has only real modes and stays contractive for every
    // predictor (checked against the literal simulator up to h_f = 50); the
    // explicit-predictor blow-up needs an oscillatory pair, which the machine
    // model provides.
    NonlinearModel smib = builtin_nonlinear("smib_avr");
    LinearDae lin = linearize(smib, smib.x_eq, smib.y_eq).dae;
    Partition part;
    part.state_class = {VarClass::Slow, VarClass::Slow, VarClass::Fast, VarClass::Fast};
    part.alg_class = {VarClass::Fast, VarClass::Fast};

    std::vector<double> grid = {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 3e-2};
    SchemeSpec fem = make_scheme(Method::FEM, Method::TM, Method::TM, 1e-3, 10);
    auto rows_fem = sweep_hf(lin, part, fem, grid, 10);
    bool any_unstable = false;
    for (const auto& row : rows_fem) {
        REQUIRE(row.error.empty());
        if (!row.stable) any_unstable = true;
    }
    CHECK(any_unstable);

    SchemeSpec tm = make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 10);
    auto rows_tm = sweep_hf(lin, part, tm, grid, 10);
    for (const auto& row : rows_tm) {
        REQUIRE(row.error.empty());
        CHECK(row.stable);
    }
}

TEST_CASE("sweep_r: r = 1 row, implicit stability, explicit non-monotonicity") {
    LinearDae lin = builtin_linear("coupled_stiff");
    Partition part = split_first_fast();
    std::vector<int> grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    const double h_s = 0.02;

    SchemeSpec tm = make_scheme(Method::TM, Method::TM, Method::TM, h_s, 1);
    auto rows_tm = sweep_r(lin, part, tm, h_s, grid);
    REQUIRE(rows_tm.size() == grid.size());
    for (const auto& row : rows_tm) {
        CHECK(row.error.empty());
        CHECK(row.stable);
        CHECK(row.h_f == doctest::Approx(h_s / row.r));
    }
    // The r = 1 row agrees with a direct single-ratio pencil report.
    SchemeSpec direct_scheme = make_scheme(Method::TM, Method::TM, Method::TM, h_s, 1);
    ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    DeformationReport direct = deformation_report(
        modes, solve_pencil(assemble_pencil(apply_partition(lin, part), direct_scheme)), h_s);
    CHECK(rows_tm[0].dominant_rel_deform ==
          doctest::Approx(direct.dominant()->rel_deform).epsilon(1e-12));

    SchemeSpec fem = make_scheme(Method::FEM, Method::TM, Method::TM, h_s, 1);
    auto rows_fem = sweep_r(lin, part, fem, h_s, grid);
    bool non_monotone = false;
    for (size_t i = 0; i + 1 < rows_fem.size(); ++i)
        if (rows_fem[i].error.empty() && rows_fem[i + 1].error.empty() &&
            rows_fem[i + 1].dominant_rel_deform > rows_fem[i].dominant_rel_deform)
            non_monotone = true;
    CHECK(non_monotone);

    auto rows_bad = sweep_r(lin, part, tm, h_s, {0});
    REQUIRE(rows_bad.size() == 1);
    CHECK_FALSE(rows_bad[0].error.empty());
}

TEST_CASE("factorization_cost matches the published accounting") {
    Dims dims{6, 4, 2, 4, 1, 3};
    SchemeSpec exp10 = make_scheme(Method::FEM, Method::TM, Method::TM, 1e-3, 10);
    CostTable t = factorization_cost(exp10, dims);
    CHECK(t.explicit_predictor.factorizations ==
          std::vector<std::pair<int, int>>{{3, 1}, {3, 10}, {7, 1}});
    CHECK(t.implicit_predictor.factorizations ==
          std::vector<std::pair<int, int>>{{10, 1}, {3, 10}, {7, 1}});
    CHECK(t.single_rate.factorizations == std::vector<std::pair<int, int>>{{10, 10}});

    SchemeSpec r5 = make_scheme(Method::TM, Method::TM, Method::TM, 1e-3, 5);
    CHECK(factorization_cost(r5, dims).single_rate.factorizations ==
          std::vector<std::pair<int, int>>{{10, 5}});
    SchemeSpec r1 = make_scheme(Method::FEM, Method::TM, Method::TM, 1e-3, 1);
    CHECK(factorization_cost(r1, dims).explicit_predictor.factorizations ==
          std::vector<std::pair<int, int>>{{3, 1}, {3, 1}, {7, 1}});
}

TEST_CASE("nyquist warning for modes beyond the principal branch") {
    Matrix A(2, 2);
    const double w = 4000.0;  // rad/s, above pi/h_f for h_f = 1e-3
    A << -1, w, -w, -1;
    ModeSet modes = eig_reduced(A);
    PencilPair pair;
    pair.F = Matrix::Identity(2, 2);
    pair.G = Matrix::Identity(2, 2) * 0.5;
    pair.h_f = 1e-3;
    pair.r = 1;
    DeformationReport rep = deformation_report(modes, solve_pencil(pair), 1e-3);
    bool warned = false;
    for (const auto& m : rep.matches) warned = warned || m.nyquist_warning;
    CHECK(warned);
}
