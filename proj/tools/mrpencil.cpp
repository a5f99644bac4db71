#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mrpencil/csv.hpp"
#include "mrpencil/model_io.hpp"
#include "mrpencil/multirate.hpp"
#include "mrpencil/pencil.hpp"

namespace fs = std::filesystem;
using namespace mrpencil;

namespace {

constexpr int kExitModelError = 2;
constexpr int kExitNumericalError = 3;
constexpr int kExitUnstable = 4;

struct CommonOpts {
    std::string model_path;
    std::string builtin_name;
    std::string partition_path;
    double pf_delta = -1.0;  // < 0 means unset
    bool all_fast = false;
    std::string scheme_path;
    std::string out_dir = ".";
    bool plot = false;

    // Inline scheme flags (used when no scheme file is given).
    std::string predictor = "TM", corrector_fast = "TM", corrector_slow = "TM";
    std::string interpolation = "linear";
    double h_f = 1e-3, h_s = 1e-2, epsilon = 1e-6;
    int max_passes = 10;
};

void add_model_flags(CLI::App* cmd, CommonOpts& o) {
    auto* m = cmd->add_option("--model", o.model_path, "model JSON file");
    auto* b = cmd->add_option("--builtin", o.builtin_name,
                              "builtin model: decoupled2, coupled_stiff, smib_avr");
    m->excludes(b);
}

void add_partition_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--partition", o.partition_path, "partition JSON file");
    cmd->add_option("--pf-delta", o.pf_delta,
                    "derive the partition by participation factors with this threshold");
    cmd->add_flag("--all-fast", o.all_fast, "single-rate partition (everything fast)");
}

void add_scheme_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--scheme", o.scheme_path, "scheme JSON file");
    cmd->add_option("--predictor", o.predictor, "FEM|TM|BEM");
    cmd->add_option("--corrector-fast", o.corrector_fast, "TM|BEM");
    cmd->add_option("--corrector-slow", o.corrector_slow, "TM|BEM");
    cmd->add_option("--interp", o.interpolation, "linear|cubic_spline");
    cmd->add_option("--hf", o.h_f, "fast step");
    cmd->add_option("--hs", o.h_s, "slow step (must be an integer multiple of --hf)");
    cmd->add_option("--epsilon", o.epsilon, "predict/correct compare tolerance");
    cmd->add_option("--max-passes", o.max_passes, "compare-loop pass cap");
}

void add_output_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_flag("--plot", o.plot, "also write SVG plots");
}

AnyModel load_any(const CommonOpts& o) {
    if (!o.model_path.empty()) return load_model(o.model_path);
    if (!o.builtin_name.empty()) return builtin_model(o.builtin_name);
    throw ModelError("no model given: use --model or --builtin");
}

LinearDae as_linear(const AnyModel& any) {
    if (is_linear(any)) return std::get<LinearDae>(any);
    const auto& model = std::get<NonlinearModel>(any);
    LinearizeResult res = linearize(model, model.x_eq, model.y_eq);
    res.dae.name = model.name;
    return res.dae;
}

NonlinearModel as_nonlinear_any(const AnyModel& any) {
    if (is_linear(any)) return as_nonlinear(std::get<LinearDae>(any));
    return std::get<NonlinearModel>(any);
}

Partition resolve_partition(const CommonOpts& o, const LinearDae& lin) {
    const int given = (!o.partition_path.empty() ? 1 : 0) + (o.pf_delta >= 0 ? 1 : 0) +
                      (o.all_fast ? 1 : 0);
    if (given != 1)
        throw ModelError(
            "exactly one partition source required: --partition, --pf-delta, or --all-fast");
    if (!o.partition_path.empty()) return load_partition(o.partition_path, lin.dims);
    if (o.all_fast) return Partition::all_fast(lin.dims.n, lin.dims.m);
    return pf_partition(lin, o.pf_delta);
}

SchemeSpec resolve_scheme(const CommonOpts& o) {
    if (!o.scheme_path.empty()) return load_scheme(o.scheme_path);
    SchemeSpec s;
    s.predictor = method_from_string(o.predictor);
    s.corrector_fast = method_from_string(o.corrector_fast);
    s.corrector_slow = method_from_string(o.corrector_slow);
    s.interpolation = interp_from_string(o.interpolation);
    s.h_f = o.h_f;
    s.h_s = o.h_s;
    s.epsilon = o.epsilon;
    s.max_passes = o.max_passes;
    s.validate();
    return s;
}

std::string out_path(const CommonOpts& o, const std::string& file) {
    fs::create_directories(o.out_dir);
    return (fs::path(o.out_dir) / file).string();
}

std::vector<double> parse_double_grid(const std::string& spec) {
    // Either "lo:hi:log|lin:count" or a comma-separated list.
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ':')) parts.push_back(tok);
        if (parts.size() != 4)
            throw ModelError("grid spec must be lo:hi:log|lin:count, got '" + spec + "'");
        const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
        const int count = std::stoi(parts[3]);
        if (count < 1 || lo <= 0 || hi <= 0 || hi < lo)
            throw ModelError("invalid grid bounds in '" + spec + "'");
        const bool logspace = parts[2] == "log";
        if (!logspace && parts[2] != "lin")
            throw ModelError("grid scale must be 'log' or 'lin' in '" + spec + "'");
        for (int i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            grid.push_back(logspace ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
        }
        return grid;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
    if (grid.empty()) throw ModelError("empty grid spec");
    return grid;
}

std::vector<int> parse_int_grid(const std::string& spec) {
    std::vector<int> grid;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stoi(tok));
    if (grid.empty()) throw ModelError("empty grid spec");
    return grid;
}

/// Minimal self-contained SVG line/scatter chart.
void write_svg_line(const std::string& path, const std::vector<double>& xs,
                    const std::vector<double>& ys, const std::string& xlabel,
                    const std::string& ylabel, bool logx, bool logy) {
    const int W = 640, H = 480, ML = 70, MR = 20, MT = 20, MB = 50;
    auto tx = [&](double v) { return logx ? std::log10(std::max(v, 1e-300)) : v; };
    auto ty = [&](double v) { return logy ? std::log10(std::max(v, 1e-300)) : v; };
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (size_t i = 0; i < xs.size(); ++i) {
        xlo = std::min(xlo, tx(xs[i]));
        xhi = std::max(xhi, tx(xs[i]));
        ylo = std::min(ylo, ty(ys[i]));
        yhi = std::max(yhi, ty(ys[i]));
    }
    if (xhi <= xlo) xhi = xlo + 1;
    if (yhi <= ylo) yhi = ylo + 1;
    auto px = [&](double v) { return ML + (tx(v) - xlo) / (xhi - xlo) * (W - ML - MR); };
    auto py = [&](double v) { return H - MB - (ty(v) - ylo) / (yhi - ylo) * (H - MT - MB); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
        << H - MB << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (W / 2) << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
        << xlabel << (logx ? " (log10)" : "") << "</text>\n";
    svg << "<text x=\"16\" y=\"" << (H / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (H / 2) << ")\">" << ylabel
        << (logy ? " (log10)" : "") << "</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i) svg << px(xs[i]) << "," << py(ys[i]) << " ";
    svg << "\"/>\n";
    for (size_t i = 0; i < xs.size(); ++i)
        svg << "<circle cx=\"" << px(xs[i]) << "\" cy=\"" << py(ys[i])
            << "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
    svg << "</svg>\n";
    csv::write_file(path, svg.str());
}

int cmd_modes(const CommonOpts& o) {
    const LinearDae lin = as_linear(load_any(o));
    const ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    const ParticipationMatrices pm = participation_matrices(lin, modes);
    csv::write_file(out_path(o, "modes.csv"), csv::modes_table(modes));
    csv::write_file(out_path(o, "participation_x.csv"),
                    csv::participation_table(pm.P_x, lin.state_names));
    csv::write_file(out_path(o, "participation_y.csv"),
                    csv::participation_table(pm.P_y, lin.alg_names));
    std::cout << "wrote modes.csv, participation_x.csv, participation_y.csv to " << o.out_dir
              << "\n";
    for (const auto& w : lin.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_partition(const CommonOpts& o, double delta) {
    const LinearDae lin = as_linear(load_any(o));
    const ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    const ParticipationMatrices pm = participation_matrices(lin, modes);
    const Partition part = pf_partition(lin, delta);
    save_partition(part, out_path(o, "partition.json"));
    const std::string summary = csv::partition_summary(lin, part, pm, modes, delta);
    csv::write_file(out_path(o, "partition_summary.csv"), summary);
    std::cout << summary;
    return 0;
}

int cmd_pencil(const CommonOpts& o) {
    const LinearDae lin = as_linear(load_any(o));
    const Partition part = resolve_partition(o, lin);
    const SchemeSpec scheme = resolve_scheme(o);
    const PartitionedLinearDae pdae = apply_partition(lin, part);
    const PencilPair pair = assemble_pencil(pdae, scheme);
    const PencilSpectrum spec = solve_pencil(pair);
    const ModeSet modes = eig_reduced(reduce_state_matrix(lin));
    const DeformationReport rep = deformation_report(modes, spec, scheme.h_f);
    csv::write_file(out_path(o, "spectrum.csv"), csv::spectrum_table(rep));
    std::cout << "spectral_radius=" << csv::fmt(rep.spectral_radius)
              << " stable=" << (rep.stable ? 1 : 0) << "\n";
    if (!rep.stable) {
        std::cerr << "pencil is unstable (spectral radius >= 1)\n";
        return kExitUnstable;
    }
    return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& hf_grid, const std::string& r_grid,
              int fixed_r) {
    const LinearDae lin = as_linear(load_any(o));
    const Partition part = resolve_partition(o, lin);
    const SchemeSpec scheme = resolve_scheme(o);
    if (hf_grid.empty() == r_grid.empty())
        throw ModelError("give exactly one of --hf-grid or --r-grid");

    std::vector<SweepRow> rows;
    std::vector<double> xs;
    std::string xlabel;
    if (!hf_grid.empty()) {
        rows = sweep_hf(lin, part, scheme, parse_double_grid(hf_grid), fixed_r);
        for (const auto& row : rows) xs.push_back(row.h_f);
        xlabel = "h_f";
    } else {
        rows = sweep_r(lin, part, scheme, scheme.h_s, parse_int_grid(r_grid));
        for (const auto& row : rows) xs.push_back(row.r);
        xlabel = "r";
    }
    csv::write_file(out_path(o, "sweep.csv"), csv::sweep_table(rows));
    std::cout << "wrote sweep.csv (" << rows.size() << " rows) to " << o.out_dir << "\n";
    if (o.plot) {
        std::vector<double> ys;
        for (const auto& row : rows) ys.push_back(row.dominant_rel_deform);
        write_svg_line(out_path(o, "sweep.svg"), xs, ys, xlabel, "dominant rel_deform",
                       !hf_grid.empty(), true);
    }
    for (const auto& row : rows)
        if (!row.error.empty())
            std::cerr << "warning: grid point h_f=" << row.h_f << " r=" << row.r << ": "
                      << row.error << "\n";
    return 0;
}

int cmd_simulate(const CommonOpts& o, double t_end, double h_ref,
                 const std::vector<std::string>& vars) {
    const AnyModel any = load_any(o);
    const NonlinearModel model = as_nonlinear_any(any);
    const LinearDae lin = as_linear(any);
    const Partition part = resolve_partition(o, lin);
    const SchemeSpec scheme = resolve_scheme(o);

    const Trajectory traj =
        run_multirate(model, scheme, part, t_end, model.events, model.x_eq, model.y_eq);
    csv::write_file(out_path(o, "trajectory.csv"), csv::trajectory_table(traj));
    csv::write_file(out_path(o, "residual.csv"), csv::residual_table(traj));
    std::cout << "wrote trajectory.csv, residual.csv to " << o.out_dir << "\n";

    if (h_ref > 0) {
        const Trajectory ref =
            run_reference(model, h_ref, t_end, model.events, model.x_eq, model.y_eq);
        csv::write_file(out_path(o, "reference.csv"), csv::trajectory_table(ref));
        for (const auto& var : vars) {
            const ErrorSeries series = trajectory_error(traj, ref, var);
            csv::write_file(out_path(o, "error_" + var + ".csv"), csv::error_table(series));
            if (o.plot) {
                std::vector<double> xs, ys;
                for (const auto& pt : series) {
                    xs.push_back(pt.t);
                    ys.push_back(pt.abs_error);
                }
                write_svg_line(out_path(o, "error_" + var + ".svg"), xs, ys, "t",
                               "|error| of " + var, false, false);
            }
        }
    }
    if (o.plot && !vars.empty()) {
        std::vector<double> xs, ys;
        for (int k = 0; k < traj.samples(); ++k) {
            xs.push_back(traj.t[k]);
            ys.push_back(traj.value(vars.front(), k));
        }
        write_svg_line(out_path(o, "trajectory_" + vars.front() + ".svg"), xs, ys, "t",
                       vars.front(), false, false);
    }
    for (const auto& meta : traj.macro_meta)
        if (meta.pass_cap_exceeded) {
            std::cerr << "warning: compare loop hit the pass cap with mismatch "
                      << meta.final_mismatch << "\n";
            break;
        }
    return 0;
}

int cmd_verify(const CommonOpts& o, const std::string& r_grid, int steps, double tol,
               double corrupt) {
    const AnyModel any = load_any(o);
    if (!is_linear(any))
        throw ModelError("verify requires a linear model (the pencil oracle is linear only)");
    const LinearDae lin = std::get<LinearDae>(any);
    const Partition part = resolve_partition(o, lin);
    SchemeSpec scheme = resolve_scheme(o);

    std::ostringstream table;
    table << "r,h_f,h_s,max_residual\n";
    double worst = 0.0;
    for (int r : parse_int_grid(r_grid)) {
        scheme.h_s = scheme.h_f * r;
        double res;
        if (corrupt != 0.0) {
            PencilPair pair = assemble_pencil(apply_partition(lin, part), scheme);
            pair.G.array() += corrupt;  // deliberate corruption for self-tests
            res = verify_pencil_consistency(lin, part, scheme, steps, pair);
        } else {
            res = verify_pencil_consistency(lin, part, scheme, steps);
        }
        worst = std::max(worst, res);
        table << r << "," << csv::fmt(scheme.h_f) << "," << csv::fmt(scheme.h_s) << ","
              << csv::fmt(res) << "\n";
    }
    csv::write_file(out_path(o, "verify.csv"), table.str());
    std::cout << "max residual " << csv::fmt(worst) << " (tolerance " << csv::fmt(tol) << ")\n";
    if (worst > tol) {
        std::cerr << "pencil/trajectory consistency check FAILED\n";
        return kExitNumericalError;
    }
    return 0;
}

int cmd_cost(const CommonOpts& o) {
    const LinearDae lin = as_linear(load_any(o));
    const Partition part = resolve_partition(o, lin);
    const SchemeSpec scheme = resolve_scheme(o);
    Dims dims = lin.dims;
    dims.n_f = part.n_fast();
    dims.n_s = part.n_slow();
    dims.m_f = part.m_fast();
    dims.m_s = part.m_slow();
    const CostTable table = factorization_cost(scheme, dims);

    std::ostringstream out;
    out << "row,order,count\n";
    for (const CostRow* row : {&table.single_rate, &table.explicit_predictor,
                               &table.implicit_predictor})
        for (const auto& [order, count] : row->factorizations)
            out << row->label << "," << order << "," << count << "\n";
    csv::write_file(out_path(o, "cost.csv"), out.str());
    std::cout << out.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multirate DAE integration analysis via matrix pencils"};
    app.require_subcommand(1);
    CommonOpts o;

    auto* modes = app.add_subcommand("modes", "eigenvalues and participation factors");
    add_model_flags(modes, o);
    add_output_flags(modes, o);

    double delta = 20.0;
    auto* partition = app.add_subcommand("partition", "participation-factor fast/slow split");
    add_model_flags(partition, o);
    partition->add_option("--delta", delta, "natural-frequency threshold");
    add_output_flags(partition, o);

    auto* pencil = app.add_subcommand("pencil", "pencil spectrum and mode deformation");
    add_model_flags(pencil, o);
    add_partition_flags(pencil, o);
    add_scheme_flags(pencil, o);
    add_output_flags(pencil, o);

    std::string hf_grid, r_grid;
    int fixed_r = 10;
    auto* sweep = app.add_subcommand("sweep", "deformation sweeps over h_f or r");
    add_model_flags(sweep, o);
    add_partition_flags(sweep, o);
    add_scheme_flags(sweep, o);
    sweep->add_option("--hf-grid", hf_grid, "h_f grid, lo:hi:log|lin:count or comma list");
    sweep->add_option("--r-grid", r_grid, "comma-separated step ratios");
    sweep->add_option("--r", fixed_r, "step ratio for --hf-grid sweeps");
    add_output_flags(sweep, o);

    double t_end = 1.0, h_ref = 0.0;
    std::vector<std::string> vars;
    auto* simulate = app.add_subcommand("simulate", "multirate simulation with diagnostics");
    add_model_flags(simulate, o);
    add_partition_flags(simulate, o);
    add_scheme_flags(simulate, o);
    simulate->add_option("--t-end", t_end, "simulation horizon (multiple of --hs)");
    simulate->add_option("--reference", h_ref, "also run a single-rate reference at this step");
    simulate->add_option("--var", vars, "variables for error series (needs --reference)");
    add_output_flags(simulate, o);

    std::string verify_r_grid = "1,2,5,10";
    int verify_steps = 25;
    double verify_tol = 1e-9, corrupt = 0.0;
    auto* verify = app.add_subcommand("verify", "pencil vs trajectory consistency oracle");
    add_model_flags(verify, o);
    add_partition_flags(verify, o);
    add_scheme_flags(verify, o);
    verify->add_option("--r-grid", verify_r_grid, "step ratios to verify");
    verify->add_option("--steps", verify_steps, "macro steps per check");
    verify->add_option("--tol", verify_tol, "max allowed residual");
    verify->add_option("--corrupt", corrupt,
                       "perturb the pencil by this amount (self-test of the oracle)");
    add_output_flags(verify, o);

    auto* cost = app.add_subcommand("cost", "per-h_s Jacobian factorization table");
    add_model_flags(cost, o);
    add_partition_flags(cost, o);
    add_scheme_flags(cost, o);
    add_output_flags(cost, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (modes->parsed()) return cmd_modes(o);
        if (partition->parsed()) return cmd_partition(o, delta);
        if (pencil->parsed()) return cmd_pencil(o);
        if (sweep->parsed()) return cmd_sweep(o, hf_grid, r_grid, fixed_r);
        if (simulate->parsed()) return cmd_simulate(o, t_end, h_ref, vars);
        if (verify->parsed())
            return cmd_verify(o, verify_r_grid, verify_steps, verify_tol, corrupt);
        if (cost->parsed()) return cmd_cost(o);
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModelError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumericalError;
    }
    return 0;
}
