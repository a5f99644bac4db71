#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <limits>
#include <random>

#include "doctest.h"
#include "mrpencil/modal.hpp"
#include "mrpencil/nonlinear.hpp"

using namespace mrpencil;

namespace {

/// Characteristic polynomial coefficients via Faddeev-LeVerrier:
/// det(sI - A) = s^n + c[1] s^{n-1} + ... + c[n].
std::vector<double> charpoly(const Matrix& A) {
    const int n = static_cast<int>(A.rows());
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Matrix M = Matrix::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        M = A * M + c[k - 1] * Matrix::Identity(n, n);
        c[k] = -(A * M).trace() / k;
    }
    return c;
}

/// Durand-Kerner simultaneous root iteration on a monic polynomial.
std::vector<Complex> poly_roots(const std::vector<double>& c) {
    const int n = static_cast<int>(c.size()) - 1;
    auto eval = [&](Complex z) {
        Complex p = 0;
        for (double ck : c) p = p * z + ck;
        return p;
    };
    std::vector<Complex> r(n);
    for (int i = 0; i < n; ++i) r[i] = std::pow(Complex(0.4, 0.9), i + 1);
    for (int iter = 0; iter < 500; ++iter) {
        double shift = 0;
        for (int i = 0; i < n; ++i) {
            Complex denom = 1;
            for (int j = 0; j < n; ++j)
                if (j != i) denom *= r[i] - r[j];
            Complex delta = eval(r[i]) / denom;
            r[i] -= delta;
            shift = std::max(shift, std::abs(delta));
        }
        if (shift < 1e-14) break;
    }
    return r;
}

std::vector<Complex> sorted_modes(std::vector<Complex> v) {
    std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return v;
}

Matrix random_matrix(std::mt19937& rng, int r, int c) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
    return M;
}

LinearDae random_dae(std::mt19937& rng, int n, int m) {
    LinearDae lin;
    lin.dims = Dims{n, m, 0, n, 0, m};
    lin.f_x = random_matrix(rng, n, n);
    lin.f_y = random_matrix(rng, n, m);
    lin.g_x = random_matrix(rng, m, n);
    do {
        lin.g_y = random_matrix(rng, m, m) + 3.0 * Matrix::Identity(m, m);
    } while (std::abs(lin.g_y.determinant()) < 1e-3);
    for (int i = 0; i < n; ++i) lin.state_names.push_back("x" + std::to_string(i));
    for (int i = 0; i < m; ++i) lin.alg_names.push_back("y" + std::to_string(i));
    return lin;
}

}  // namespace

TEST_CASE("eig_reduced on a diagonal matrix") {
    Matrix A(2, 2);
    A << -1, 0, 0, -2;
    ModeSet modes = eig_reduced(A);
    auto s = sorted_modes({modes.eigenvalues(0), modes.eigenvalues(1)});
    CHECK(std::abs(s[0] - Complex(-2, 0)) <= 1e-12);
    CHECK(std::abs(s[1] - Complex(-1, 0)) <= 1e-12);
    // Each eigenvector is the basis vector of its eigenvalue's own state.
    for (int i = 0; i < 2; ++i) {
        int expect = std::abs(modes.eigenvalues(i) - Complex(-1, 0)) < 0.5 ? 0 : 1;
        CHECK(std::abs(modes.V(expect, i) - Complex(1, 0)) <= 1e-12);
        CHECK(std::abs(modes.V(1 - expect, i)) <= 1e-12);
        CHECK(std::abs(modes.W(i, expect) - Complex(1, 0)) <= 1e-12);
    }
}

TEST_CASE("eig_reduced on the rotation generator") {
    Matrix A(2, 2);
    A << 0, 1, -1, 0;
    ModeSet modes = eig_reduced(A);
    auto s = sorted_modes({modes.eigenvalues(0), modes.eigenvalues(1)});
    CHECK(std::abs(s[0] - Complex(0, -1)) <= 1e-12);
    CHECK(std::abs(s[1] - Complex(0, 1)) <= 1e-12);
}

TEST_CASE("smib_avr eigenvalues match an independent characteristic-polynomial solve") {
    NonlinearModel smib = builtin_nonlinear("smib_avr");
    LinearDae lin = linearize(smib, smib.x_eq, smib.y_eq).dae;
    Matrix A = reduce_state_matrix(lin);
    ModeSet modes = eig_reduced(A);
    auto roots = poly_roots(charpoly(A));
    std::vector<Complex> eigs;
    for (int i = 0; i < modes.size(); ++i) eigs.push_back(modes.eigenvalues(i));
    REQUIRE(roots.size() == eigs.size());
    // Pair each root with its nearest unused eigenvalue; plain sorting by real
    // part is unstable when distinct modes share nearly equal real parts.
    const double scale = A.cwiseAbs().maxCoeff();
    std::vector<bool> used(eigs.size(), false);
    for (const Complex root : roots) {
        size_t best = eigs.size();
        double dist = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < eigs.size(); ++j)
            if (!used[j] && std::abs(root - eigs[j]) < dist) {
                dist = std::abs(root - eigs[j]);
                best = j;
            }
        REQUIRE(best < eigs.size());
        used[best] = true;
        CHECK(dist <= 1e-8 * scale);
    }
}

TEST_CASE("eigenvector residuals and biorthonormality") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix A = random_matrix(rng, 6, 6);
        ModeSet modes = eig_reduced(A);
        const double nA = A.norm();
        ComplexMatrix Ac = A.cast<Complex>();
        for (int i = 0; i < modes.size(); ++i) {
            ComplexVector v = modes.V.col(i);
            CHECK((Ac * v - modes.eigenvalues(i) * v).norm() <= 1e-8 * nA);
            ComplexVector w = modes.W.row(i).transpose();
            CHECK((Ac.transpose() * w - modes.eigenvalues(i) * w).norm() <= 1e-8 * nA);
        }
        ComplexMatrix WV = modes.W * modes.V;
        CHECK((WV - ComplexMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("defective matrices are flagged and rejected by participation analysis") {
    Matrix J(2, 2);
    J << 1, 1, 0, 1;  // Jordan block
    ModeSet modes = eig_reduced(J);
    CHECK_FALSE(modes.diagonalizable);
    CHECK_THROWS_AS(participation_states(modes), NumericalError);

    Matrix D(2, 2);
    D << 1, 1, 0, 2;  // distinct eigenvalues: diagonalizable despite coupling
    CHECK(eig_reduced(D).diagonalizable);
}

TEST_CASE("participation_states on diagonal and symmetric matrices") {
    Matrix D(2, 2);
    D << -3, 0, 0, -7;
    ComplexMatrix Pd = participation_states(eig_reduced(D));
    CHECK((Pd - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);

    Matrix S(2, 2);
    S << -2, 1, 1, -2;
    ComplexMatrix Ps = participation_states(eig_reduced(S));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(Ps(i, j) - Complex(0.5, 0)) <= 1e-12);
}

TEST_CASE("P_x rows sum to one for random diagonalizable matrices") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        Matrix A = random_matrix(rng, 6, 6);
        ComplexMatrix P = participation_states(eig_reduced(A));
        for (int k = 0; k < 6; ++k) CHECK(std::abs(P.row(k).sum() - Complex(1, 0)) <= 1e-8);
    }
}

TEST_CASE("participation_algebraic identity map and zero rows") {
    LinearDae d2 = builtin_linear("decoupled2");
    ModeSet modes = eig_reduced(reduce_state_matrix(d2));
    ComplexMatrix Px = participation_states(modes);
    std::vector<int> zero_rows;
    ComplexMatrix Py = participation_algebraic(d2, Px, &zero_rows);
    CHECK(zero_rows.empty());
    // g_x = I, g_y = -I: P_y = P_x (which is I up to eigenvalue ordering).
    CHECK((Py - Px).cwiseAbs().maxCoeff() <= 1e-12);

    LinearDae dec = d2;
    dec.g_x = Matrix::Zero(2, 2);
    ComplexMatrix Py0 = participation_algebraic(dec, Px, &zero_rows);
    CHECK(zero_rows.size() == 2);
    CHECK(Py0.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("smib_avr P_y matches the summation oracle") {
    NonlinearModel smib = builtin_nonlinear("smib_avr");
    LinearDae lin = linearize(smib, smib.x_eq, smib.y_eq).dae;
    ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    ComplexMatrix Px = participation_states(modes);
    ComplexMatrix Py = participation_algebraic(lin, Px);

    // Independent evaluation: C = -g_y^{-1} g_x via explicit inverse, then
    // row mu of P_y as sum_k C(mu,k) P_x(k,i), row-normalized.
    Matrix C = -lin.g_y.inverse() * lin.g_x;
    const int m = lin.dims.m, n = lin.dims.n;
    ComplexMatrix ref(m, n);
    for (int mu = 0; mu < m; ++mu) {
        for (int i = 0; i < n; ++i) {
            Complex acc = 0;
            for (int k = 0; k < n; ++k) acc += C(mu, k) * Px(k, i);
            ref(mu, i) = acc;
        }
        double norm = ref.row(mu).norm();
        if (norm > 0) ref.row(mu) /= norm;
    }
    CHECK((Py - ref).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("nonzero P_y rows are unit norm") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        LinearDae lin = random_dae(rng, 6, 4);
        ParticipationMatrices pm = participation_matrices(lin, eig_reduced(reduce_state_matrix(lin)));
        for (int mu = 0; mu < 4; ++mu)
            CHECK(std::abs(pm.P_y.row(mu).norm() - 1.0) <= 1e-10);
    }
}

TEST_CASE("pf_partition threshold behavior on decoupled2") {
    LinearDae d2 = builtin_linear("decoupled2");
    Partition p10 = pf_partition(d2, 10.0);
    CHECK(p10.state_class == std::vector<VarClass>{VarClass::Fast, VarClass::Slow});
    CHECK(p10.alg_class == std::vector<VarClass>{VarClass::Fast, VarClass::Slow});

    Partition p0 = pf_partition(d2, 0.0);
    CHECK(p0.n_fast() == 2);
    CHECK(p0.m_fast() == 2);

    Partition phigh = pf_partition(d2, 1e6);
    CHECK(phigh.n_fast() == 0);
    CHECK(phigh.m_fast() == 0);
}

TEST_CASE("pf_partition is monotone in delta") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        LinearDae lin = random_dae(rng, 6, 4);
        std::vector<double> deltas = {0.0, 0.5, 1.0, 2.0, 5.0, 50.0};
        Partition prev = pf_partition(lin, deltas[0]);
        for (size_t d = 1; d < deltas.size(); ++d) {
            Partition cur = pf_partition(lin, deltas[d]);
            for (int k = 0; k < 6; ++k)
                if (prev.state_class[k] == VarClass::Slow)
                    CHECK(cur.state_class[k] == VarClass::Slow);
            for (int k = 0; k < 4; ++k)
                if (prev.alg_class[k] == VarClass::Slow)
                    CHECK(cur.alg_class[k] == VarClass::Slow);
            prev = cur;
        }
    }
}

TEST_CASE("conjugate pairs share a classification on smib_avr") {
    NonlinearModel smib = builtin_nonlinear("smib_avr");
    LinearDae lin = linearize(smib, smib.x_eq, smib.y_eq).dae;
    ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    // The model carries one oscillatory pair.
    int complex_count = 0;
    for (int i = 0; i < modes.size(); ++i)
        if (std::abs(modes.eigenvalues(i).imag()) > 1e-9) ++complex_count;
    CHECK(complex_count == 2);
    ParticipationMatrices pm = participation_matrices(lin, modes);
    for (double delta : {0.5, 5.0, 20.0, 100.0}) {
        Partition part = pf_partition(lin, delta);
        // Any two states dominated by the conjugate pair must agree.
        for (int a = 0; a < lin.dims.n; ++a)
            for (int b = 0; b < lin.dims.n; ++b) {
                Complex la = modes.eigenvalues(pm.dominant_state_mode[a]);
                Complex lb = modes.eigenvalues(pm.dominant_state_mode[b]);
                if (std::abs(la - std::conj(lb)) <= 1e-9 * std::abs(la))
                    CHECK(part.state_class[a] == part.state_class[b]);
            }
    }
}

TEST_CASE("damping_ratio formula") {
    CHECK(damping_ratio(Complex(0, 0)) == 0.0);
    CHECK(damping_ratio(Complex(-1, 0)) == doctest::Approx(1.0));
    CHECK(damping_ratio(Complex(-3, 4)) == doctest::Approx(0.6));
    NonlinearModel smib = builtin_nonlinear("smib_avr");
    LinearDae lin = linearize(smib, smib.x_eq, smib.y_eq).dae;
    ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    bool found = false;
    for (int i = 0; i < modes.size(); ++i) {
        Complex s = modes.eigenvalues(i);
        if (s.imag() > 1e-9) {
            double z = damping_ratio(s);
            CHECK(z > 0.0);
            CHECK(z < 1.0);
            found = true;
        }
    }
    CHECK(found);
}
