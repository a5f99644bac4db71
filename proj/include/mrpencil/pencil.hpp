#pragma once

#include <optional>

#include "mrpencil/modal.hpp"
#include "mrpencil/scheme.hpp"

namespace mrpencil {

/// The z-domain pencil z F_r - G_r over one macro interval. Block k of the
/// stacked window corresponds to the full variable vector (x_f, x_s, y_f, y_s)
/// at t + (r - k + 1) h_f, k = 1..r.
struct PencilPair {
    Matrix F;  // order r(n+m)
    Matrix G;
    int r = 1;
    Dims dims;
    double h_f = 0;
    std::vector<std::string> block_layout;  // human-readable row/col meaning
};

struct PencilSpectrum {
    std::vector<Complex> z;      // finite eigenvalues
    std::vector<Complex> s_hat;  // log(z)/h_f for |z| above the log cutoff
    std::vector<Complex> z_for_s_hat;  // z paired with each s_hat entry
    int infinite_count = 0;      // |beta| below the filter
    int near_zero_count = 0;     // |z| <= 1e-14, excluded from the log map
    double h_f = 0;

    double spectral_radius() const {
        double rho = 0;
        for (auto zi : z) rho = std::max(rho, std::abs(zi));
        return rho;
    }
};

struct ModeMatch {
    Complex s;
    Complex s_hat;
    Complex z;
    double rel_deform = 0;  // |s_hat - s| / |s|
    double re_deform = 0;   // |Re s_hat - Re s|
    double im_deform = 0;   // |Im s_hat - Im s|
    bool matched = true;
    bool nyquist_warning = false;  // |Im s| >= pi/h_f
};

struct DeformationReport {
    std::vector<ModeMatch> matches;  // one per continuous mode
    double spectral_radius = 0;
    bool stable = false;  // spectral radius < 1

    /// Oscillatory pair with the smallest damping ratio; falls back to the
    /// slowest nonzero mode when the spectrum is purely real.
    const ModeMatch* dominant() const;
};

/// Assemble F_r, G_r per the partitioned single-pass scheme. Rejects
/// cubic-spline interpolation (no linear pencil representation exists).
PencilPair assemble_pencil(const PartitionedLinearDae& pdae, const SchemeSpec& scheme);

/// QZ generalized eigenvalues of (G, F); infinite pairs filtered by
/// |beta| <= 1e-12 * max(||F||_inf, ||G||_inf).
PencilSpectrum solve_pencil(const PencilPair& pair);

/// Greedy nearest-in-s matching, modes visited by ascending |s|.
DeformationReport deformation_report(const ModeSet& modes, const PencilSpectrum& spectrum,
                                     double h_f);

struct SweepRow {
    double h_f = 0, h_s = 0;
    int r = 0;
    double dominant_rel_deform = 0;
    double dominant_re_deform = 0;
    double dominant_im_deform = 0;
    double spectral_radius = 0;
    bool stable = false;
    std::string error;  // nonempty when this grid point failed
};

std::vector<SweepRow> sweep_hf(const LinearDae& lin, const Partition& part,
                               const SchemeSpec& scheme_template,
                               const std::vector<double>& hf_grid, int r);

std::vector<SweepRow> sweep_r(const LinearDae& lin, const Partition& part,
                              const SchemeSpec& scheme_template, double h_s,
                              const std::vector<int>& r_grid);

}  // namespace mrpencil
