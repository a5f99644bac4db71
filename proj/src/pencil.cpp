#include "mrpencil/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace mrpencil {

namespace {

/// Matrices shared by all window blocks of one pencil.
struct AssemblyParts {
    int n, m, nf, ns, mf, ms, N;
    Matrix fx, fy, gx, gy;   // block-permuted Jacobians
    Matrix FX;               // n x N, [f_x f_y]
    Matrix GX;               // m x N, [g_x g_y]
    Matrix SelXs, SelYs;     // selectors of the slow entries of a block
    Matrix Pxs;              // n_s x N, slow rows of the predictor map
    Matrix YPs;              // m_s x N, slow rows of the predicted algebraic solve
    MethodParams p;
};

AssemblyParts make_parts(const PartitionedLinearDae& pdae, const SchemeSpec& scheme) {
    AssemblyParts a;
    a.n = pdae.dims.n;
    a.m = pdae.dims.m;
    a.nf = pdae.dims.n_f;
    a.ns = pdae.dims.n_s;
    a.mf = pdae.dims.m_f;
    a.ms = pdae.dims.m_s;
    a.N = a.n + a.m;
    a.fx = pdae.fx;
    a.fy = pdae.fy;
    a.gx = pdae.gx;
    a.gy = pdae.gy;
    a.p = method_params(scheme);

    a.FX.resize(a.n, a.N);
    a.FX << a.fx, a.fy;
    a.GX.resize(a.m, a.N);
    a.GX << a.gx, a.gy;

    a.SelXs = Matrix::Zero(a.ns, a.N);
    a.SelXs.middleCols(a.nf, a.ns) = Matrix::Identity(a.ns, a.ns);
    a.SelYs = Matrix::Zero(a.ms, a.N);
    a.SelYs.middleCols(a.n + a.mf, a.ms) = Matrix::Identity(a.ms, a.ms);

    // Predicted macro-end point as an affine map of the macro-start block:
    // the predictor is applied with the algebraic constraint held, so the
    // predicted states satisfy (I - a* A) x^P = (I + a f_x) x0 + a f_y y0
    // with A the reduced state matrix, and y^P solves g(x^P, y^P) = 0.
    Matrix Y;
    if (a.m > 0) {
        Eigen::FullPivLU<Matrix> lugy(a.gy);
        if (!lugy.isInvertible())
            throw NumericalError("assemble_pencil: g_y is singular (rcond " +
                                 std::to_string(lugy.rcond()) + ")");
        Y = -lugy.solve(a.gx);
    } else {
        Y = Matrix::Zero(0, a.n);
    }
    const Matrix A = a.fx + a.fy * Y;
    Matrix rhs(a.n, a.N);
    rhs << Matrix::Identity(a.n, a.n) + a.p.a * a.fx, a.p.a * a.fy;
    Matrix Xp;
    if (a.p.a_star == 0.0) {
        Xp = rhs;
    } else {
        Eigen::PartialPivLU<Matrix> lupred(Matrix::Identity(a.n, a.n) - a.p.a_star * A);
        Xp = lupred.solve(rhs);
        if (!Xp.allFinite())
            throw NumericalError("assemble_pencil: implicit predictor matrix is singular");
    }
    a.Pxs = Xp.bottomRows(a.ns);
    a.YPs = (Y * Xp).bottomRows(a.ms);
    return a;
}

Matrix interior_Z(const AssemblyParts& a) {
    Matrix Z = Matrix::Zero(a.N, a.N);
    // Fast states: new-point corrector terms over the full block.
    Z.topRows(a.nf) = -a.p.b_star * a.FX.topRows(a.nf);
    Z.block(0, 0, a.nf, a.nf) += Matrix::Identity(a.nf, a.nf);
    // Slow states and algebraics hold interpolated values.
    Z.middleRows(a.nf, a.ns) = a.SelXs;
    // Fast algebraic constraint over the full (interpolated) block.
    Z.middleRows(a.n, a.mf) = a.GX.topRows(a.mf);
    Z.bottomRows(a.ms) = a.SelYs;
    return Z;
}

Matrix macro_Z(const AssemblyParts& a) {
    Matrix Z = Matrix::Zero(a.N, a.N);
    // Fast rows couple only to fast columns: the micro step at the macro end
    // still sees the predicted slow values, which live in the coupling block.
    Z.block(0, 0, a.nf, a.nf) =
        Matrix::Identity(a.nf, a.nf) - a.p.b_star * a.fx.topLeftCorner(a.nf, a.nf);
    Z.block(0, a.n, a.nf, a.mf) = -a.p.b_star * a.fy.topLeftCorner(a.nf, a.mf);
    // Slow corrector new-point terms over the full corrected block.
    Z.middleRows(a.nf, a.ns) = a.SelXs - a.p.c_star * a.FX.bottomRows(a.ns);
    // Fast algebraic constraint, slow entries again via the coupling block.
    Z.block(a.n, 0, a.mf, a.nf) = a.gx.topLeftCorner(a.mf, a.nf);
    Z.block(a.n, a.n, a.mf, a.mf) = a.gy.topLeftCorner(a.mf, a.mf);
    // Slow algebraics are solved exactly at the macro end.
    Z.bottomRows(a.ms) = a.GX.bottomRows(a.ms);
    return Z;
}

Matrix fast_B(const AssemblyParts& a) {
    Matrix B = Matrix::Zero(a.N, a.N);
    B.topRows(a.nf) = a.p.b * a.FX.topRows(a.nf);
    B.block(0, 0, a.nf, a.nf) += Matrix::Identity(a.nf, a.nf);
    return B;
}

Matrix interp_D(const AssemblyParts& a, int i, int r) {
    const double w = static_cast<double>(i) / r;
    Matrix D = Matrix::Zero(a.N, a.N);
    D.middleRows(a.nf, a.ns) = (1.0 - w) * a.SelXs + w * a.Pxs;
    D.bottomRows(a.ms) = (1.0 - w) * a.SelYs + w * a.YPs;
    return D;
}

Matrix macro_C(const AssemblyParts& a) {
    Matrix C = Matrix::Zero(a.N, a.N);
    C.topRows(a.nf) = a.p.b_star * (a.fx.topRightCorner(a.nf, a.ns) * a.Pxs +
                                    a.fy.topRightCorner(a.nf, a.ms) * a.YPs);
    C.middleRows(a.nf, a.ns) = a.SelXs + a.p.c * a.FX.bottomRows(a.ns);
    C.middleRows(a.n, a.mf) = -(a.gx.topRightCorner(a.mf, a.ns) * a.Pxs +
                                a.gy.topRightCorner(a.mf, a.ms) * a.YPs);
    return C;
}

}  // namespace

PencilPair assemble_pencil(const PartitionedLinearDae& pdae, const SchemeSpec& scheme) {
    if (scheme.interpolation == InterpMode::CubicSpline)
        throw ModelError(
            "assemble_pencil: cubic-spline interpolation couples four macro intervals and has "
            "no one-interval pencil form; use linear interpolation for pencil analysis");
    pdae.dims.validate();
    const int r = scheme.ratio();
    const AssemblyParts a = make_parts(pdae, scheme);
    const int N = a.N;

    PencilPair out;
    out.r = r;
    out.dims = pdae.dims;
    out.h_f = scheme.h_f;
    out.F = Matrix::Zero(r * N, r * N);
    out.G = Matrix::Zero(r * N, r * N);

    const Matrix Zi = interior_Z(a);
    const Matrix Zr = macro_Z(a);
    const Matrix B = fast_B(a);
    const Matrix C = macro_C(a);

    // Block row k (0-based) carries the micro-step equation at index
    // i = r - k; the macro-start coupling lands in the last block column.
    for (int k = 0; k < r; ++k) {
        const int i = r - k;
        out.F.block(k * N, k * N, N, N) = (i == r) ? Zr : Zi;
        out.G.block(k * N, k * N, N, N) += B;
        out.G.block(k * N, (r - 1) * N, N, N) += (i == r) ? C : interp_D(a, i, r);
    }

    out.block_layout.reserve(r);
    for (int k = 0; k < r; ++k)
        out.block_layout.push_back("block " + std::to_string(k + 1) + ": variables at t+" +
                                   std::to_string(r - k) + "*h_f (x_f, x_s, y_f, y_s)");
    return out;
}

PencilSpectrum solve_pencil(const PencilPair& pair) {
    PencilSpectrum spec;
    spec.h_f = pair.h_f;
    if (pair.F.rows() == 0) return spec;

    Eigen::GeneralizedEigenSolver<Matrix> ges;
    ges.compute(pair.G, pair.F, /*computeEigenvectors=*/false);
    if (ges.info() != Eigen::Success)
        throw NumericalError("solve_pencil: QZ iteration failed");

    const double scale = std::max(pair.F.cwiseAbs().rowwise().sum().maxCoeff(),
                                  pair.G.cwiseAbs().rowwise().sum().maxCoeff());
    const double beta_cut = 1e-12 * scale;

    for (int i = 0; i < ges.alphas().size(); ++i) {
        const Complex alpha = ges.alphas()(i);
        const double beta = ges.betas()(i);
        if (std::abs(beta) <= beta_cut) {
            ++spec.infinite_count;
            continue;
        }
        const Complex z = alpha / beta;
        spec.z.push_back(z);
        if (std::abs(z) <= 1e-14) {
            ++spec.near_zero_count;
            continue;
        }
        spec.s_hat.push_back(std::log(z) / pair.h_f);
        spec.z_for_s_hat.push_back(z);
    }
    return spec;
}

DeformationReport deformation_report(const ModeSet& modes, const PencilSpectrum& spectrum,
                                     double h_f) {
    DeformationReport rep;
    rep.spectral_radius = spectrum.spectral_radius();
    rep.stable = rep.spectral_radius < 1.0;

    std::vector<int> order(modes.size());
    for (int i = 0; i < modes.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(modes.eigenvalues(a)) < std::abs(modes.eigenvalues(b));
    });

    std::vector<bool> used(spectrum.s_hat.size(), false);
    rep.matches.resize(modes.size());
    for (int idx : order) {
        const Complex s = modes.eigenvalues(idx);
        ModeMatch& mm = rep.matches[idx];
        mm.s = s;
        mm.nyquist_warning = std::abs(s.imag()) >= std::numbers::pi / h_f;
        int best = -1;
        double bestd = 0;
        for (size_t j = 0; j < spectrum.s_hat.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(spectrum.s_hat[j] - s);
            if (best < 0 || d < bestd) {
                best = static_cast<int>(j);
                bestd = d;
            }
        }
        if (best < 0) {
            mm.matched = false;
            continue;
        }
        used[best] = true;
        mm.matched = true;
        mm.s_hat = spectrum.s_hat[best];
        mm.z = spectrum.z_for_s_hat[best];
        const double mag = std::abs(s);
        mm.rel_deform = mag > 0 ? std::abs(mm.s_hat - s) / mag : std::abs(mm.s_hat - s);
        mm.re_deform = std::abs(mm.s_hat.real() - s.real());
        mm.im_deform = std::abs(mm.s_hat.imag() - s.imag());
    }
    return rep;
}

const ModeMatch* DeformationReport::dominant() const {
    const ModeMatch* best = nullptr;
    // Prefer the least-damped oscillatory pair.
    for (const auto& mm : matches) {
        const double mag = std::abs(mm.s);
        if (mag == 0.0 || std::abs(mm.s.imag()) <= 1e-12 * mag) continue;
        if (!best) {
            best = &mm;
            continue;
        }
        const double za = damping_ratio(mm.s), zb = damping_ratio(best->s);
        if (za < zb - 1e-15 ||
            (std::abs(za - zb) <= 1e-15 && std::abs(mm.s.imag()) > std::abs(best->s.imag())))
            best = &mm;
    }
    if (best) return best;
    // Purely real spectrum: fall back to the slowest nonzero mode.
    for (const auto& mm : matches) {
        if (std::abs(mm.s) == 0.0) continue;
        if (!best || std::abs(mm.s) < std::abs(best->s)) best = &mm;
    }
    return best;
}

namespace {

SweepRow sweep_point(const LinearDae& lin, const Partition& part, const ModeSet& modes,
                     SchemeSpec scheme, double h_f, int r) {
    SweepRow row;
    row.h_f = h_f;
    row.h_s = r * h_f;
    row.r = r;
    try {
        scheme.h_f = h_f;
        scheme.h_s = r * h_f;
        const PartitionedLinearDae pdae = apply_partition(lin, part);
        const PencilPair pair = assemble_pencil(pdae, scheme);
        const PencilSpectrum spec = solve_pencil(pair);
        const DeformationReport rep = deformation_report(modes, spec, h_f);
        row.spectral_radius = rep.spectral_radius;
        row.stable = rep.stable;
        const ModeMatch* dom = rep.dominant();
        if (!dom || !dom->matched) {
            row.error = "no matched dominant mode";
            return row;
        }
        row.dominant_rel_deform = dom->rel_deform;
        row.dominant_re_deform = dom->re_deform;
        row.dominant_im_deform = dom->im_deform;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<SweepRow> sweep_hf(const LinearDae& lin, const Partition& part,
                               const SchemeSpec& scheme_template,
                               const std::vector<double>& hf_grid, int r) {
    const ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    std::vector<SweepRow> rows;
    rows.reserve(hf_grid.size());
    for (double h_f : hf_grid) rows.push_back(sweep_point(lin, part, modes, scheme_template, h_f, r));
    return rows;
}

std::vector<SweepRow> sweep_r(const LinearDae& lin, const Partition& part,
                              const SchemeSpec& scheme_template, double h_s,
                              const std::vector<int>& r_grid) {
    const ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    std::vector<SweepRow> rows;
    rows.reserve(r_grid.size());
    for (int r : r_grid) {
        if (r < 1) {
            SweepRow row;
            row.r = r;
            row.h_s = h_s;
            row.error = "step ratio must be a positive integer";
            rows.push_back(row);
            continue;
        }
        rows.push_back(sweep_point(lin, part, modes, scheme_template, h_s / r, r));
    }
    return rows;
}

}  // namespace mrpencil
