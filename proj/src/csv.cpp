#include "mrpencil/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mrpencil {
namespace csv {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

namespace {
std::string fmtc(Complex v) { return fmt(v.real()) + "," + fmt(v.imag()); }
}  // namespace

std::string modes_table(const ModeSet& modes) {
    std::ostringstream out;
    out << "mode,re_s,im_s,freq_hz,damping_ratio\n";
    for (int i = 0; i < modes.size(); ++i) {
        const Complex s = modes.eigenvalues(i);
        out << i << "," << fmtc(s) << "," << fmt(std::abs(s.imag()) / (2.0 * M_PI)) << ","
            << fmt(damping_ratio(s)) << "\n";
    }
    return out.str();
}

std::string participation_table(const ComplexMatrix& P,
                                const std::vector<std::string>& row_names) {
    std::ostringstream out;
    out << "variable";
    for (int i = 0; i < P.cols(); ++i) out << ",re_p" << i << ",im_p" << i << ",abs_p" << i;
    out << "\n";
    for (int k = 0; k < P.rows(); ++k) {
        out << row_names.at(k);
        for (int i = 0; i < P.cols(); ++i)
            out << "," << fmtc(P(k, i)) << "," << fmt(std::abs(P(k, i)));
        out << "\n";
    }
    return out.str();
}

std::string spectrum_table(const DeformationReport& report) {
    std::ostringstream out;
    out << "re_s,im_s,re_s_hat,im_s_hat,abs_z,rel_deform,re_deform,im_deform,"
           "matched,nyquist_warning\n";
    for (const ModeMatch& mm : report.matches) {
        out << fmtc(mm.s) << "," << fmtc(mm.s_hat) << "," << fmt(std::abs(mm.z)) << ","
            << fmt(mm.rel_deform) << "," << fmt(mm.re_deform) << "," << fmt(mm.im_deform) << ","
            << (mm.matched ? 1 : 0) << "," << (mm.nyquist_warning ? 1 : 0) << "\n";
    }
    return out.str();
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "h_f,h_s,r,dominant_rel_deform,dominant_re_deform,dominant_im_deform,"
           "spectral_radius,stable,error\n";
    for (const auto& row : rows) {
        out << fmt(row.h_f) << "," << fmt(row.h_s) << "," << row.r << ","
            << fmt(row.dominant_rel_deform) << "," << fmt(row.dominant_re_deform) << ","
            << fmt(row.dominant_im_deform) << "," << fmt(row.spectral_radius) << ","
            << (row.stable ? 1 : 0) << "," << row.error << "\n";
    }
    return out.str();
}

std::string trajectory_table(const Trajectory& traj) {
    std::ostringstream out;
    out << "t";
    for (const auto& name : traj.state_names) out << "," << name;
    for (const auto& name : traj.alg_names) out << "," << name;
    out << "\n";
    for (int k = 0; k < traj.samples(); ++k) {
        out << fmt(traj.t[k]);
        for (int i = 0; i < traj.x[k].size(); ++i) out << "," << fmt(traj.x[k](i));
        for (int i = 0; i < traj.y[k].size(); ++i) out << "," << fmt(traj.y[k](i));
        out << "\n";
    }
    return out.str();
}

std::string residual_table(const Trajectory& traj) {
    std::ostringstream out;
    out << "t,slow_alg_residual\n";
    for (int k = 0; k < traj.samples(); ++k)
        out << fmt(traj.t[k]) << "," << fmt(traj.residual_slow[k]) << "\n";
    return out.str();
}

std::string error_table(const ErrorSeries& series) {
    std::ostringstream out;
    out << "t,abs_error\n";
    for (const auto& pt : series) out << fmt(pt.t) << "," << fmt(pt.abs_error) << "\n";
    return out.str();
}

std::string partition_summary(const LinearDae& lin, const Partition& part,
                              const ParticipationMatrices& pm, const ModeSet& modes,
                              double delta) {
    std::ostringstream out;
    out << "variable,kind,class,dominant_mode,dominant_mode_magnitude,zero_row,delta\n";
    for (int k = 0; k < lin.dims.n; ++k) {
        const int mode = pm.dominant_state_mode[k];
        out << lin.state_names.at(k) << ",state,"
            << (part.state_class[k] == VarClass::Fast ? "fast" : "slow") << "," << mode << ","
            << fmt(std::abs(modes.eigenvalues(mode))) << ",0," << fmt(delta) << "\n";
    }
    for (int k = 0; k < lin.dims.m; ++k) {
        const int mode = pm.dominant_alg_mode[k];
        out << lin.alg_names.at(k) << ",algebraic,"
            << (part.alg_class[k] == VarClass::Fast ? "fast" : "slow") << "," << mode << ","
            << (mode >= 0 ? fmt(std::abs(modes.eigenvalues(mode))) : fmt(0.0)) << ","
            << (mode < 0 ? 1 : 0) << "," << fmt(delta) << "\n";
    }
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write '" + path + "'");
    out << content;
}

}  // namespace csv
}  // namespace mrpencil
