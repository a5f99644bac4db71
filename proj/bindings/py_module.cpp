#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mrpencil/csv.hpp"
#include "mrpencil/model_io.hpp"
#include "mrpencil/multirate.hpp"
#include "mrpencil/pencil.hpp"

namespace py = pybind11;
using namespace mrpencil;

namespace {

Partition partition_from_lists(int n, int m, const std::vector<int>& fast_states,
                               const std::vector<int>& fast_algs) {
    Partition part = Partition::all_slow(n, m);
    for (int idx : fast_states) part.state_class.at(idx) = VarClass::Fast;
    for (int idx : fast_algs) part.alg_class.at(idx) = VarClass::Fast;
    return part;
}

}  // namespace

PYBIND11_MODULE(_mrpencil, mod) {
    mod.doc() = "Matrix-pencil analysis of multirate DAE integration schemes";

    py::register_exception<ModelError>(mod, "ModelError");
    py::register_exception<NumericalError>(mod, "NumericalError");

    py::enum_<Method>(mod, "Method")
        .value("FEM", Method::FEM)
        .value("TM", Method::TM)
        .value("BEM", Method::BEM);
    py::enum_<InterpMode>(mod, "InterpMode")
        .value("Linear", InterpMode::Linear)
        .value("CubicSpline", InterpMode::CubicSpline);
    py::enum_<VarClass>(mod, "VarClass")
        .value("Fast", VarClass::Fast)
        .value("Slow", VarClass::Slow);

    py::class_<Dims>(mod, "Dims")
        .def(py::init<>())
        .def_readwrite("n", &Dims::n)
        .def_readwrite("m", &Dims::m)
        .def_readwrite("n_f", &Dims::n_f)
        .def_readwrite("n_s", &Dims::n_s)
        .def_readwrite("m_f", &Dims::m_f)
        .def_readwrite("m_s", &Dims::m_s);

    py::class_<Partition>(mod, "Partition")
        .def(py::init(&partition_from_lists), py::arg("n"), py::arg("m"),
             py::arg("fast_states") = std::vector<int>{},
             py::arg("fast_algebraics") = std::vector<int>{})
        .def_static("all_fast", &Partition::all_fast)
        .def_static("all_slow", &Partition::all_slow)
        .def_property_readonly("state_class", [](const Partition& p) { return p.state_class; })
        .def_property_readonly("alg_class", [](const Partition& p) { return p.alg_class; })
        .def("n_fast", &Partition::n_fast)
        .def("n_slow", &Partition::n_slow)
        .def("m_fast", &Partition::m_fast)
        .def("m_slow", &Partition::m_slow);

    py::class_<LinearDae>(mod, "LinearDae")
        .def(py::init<>())
        .def_readwrite("f_x", &LinearDae::f_x)
        .def_readwrite("f_y", &LinearDae::f_y)
        .def_readwrite("g_x", &LinearDae::g_x)
        .def_readwrite("g_y", &LinearDae::g_y)
        .def_readwrite("dims", &LinearDae::dims)
        .def_readwrite("name", &LinearDae::name)
        .def_readwrite("state_names", &LinearDae::state_names)
        .def_readwrite("alg_names", &LinearDae::alg_names)
        .def("validate", &LinearDae::validate)
        .def("gy_rcond", &LinearDae::gy_rcond);

    py::class_<NonlinearModel>(mod, "NonlinearModel")
        .def_readonly("name", &NonlinearModel::name)
        .def_readonly("dims", &NonlinearModel::dims)
        .def_readonly("state_names", &NonlinearModel::state_names)
        .def_readonly("alg_names", &NonlinearModel::alg_names)
        .def_readonly("params", &NonlinearModel::params)
        .def_readonly("x_eq", &NonlinearModel::x_eq)
        .def_readonly("y_eq", &NonlinearModel::y_eq)
        .def("with_parameter", &NonlinearModel::with_parameter)
        .def("residual_inf", &NonlinearModel::residual_inf);

    py::class_<SchemeSpec>(mod, "SchemeSpec")
        .def(py::init<>())
        .def_readwrite("predictor", &SchemeSpec::predictor)
        .def_readwrite("corrector_fast", &SchemeSpec::corrector_fast)
        .def_readwrite("corrector_slow", &SchemeSpec::corrector_slow)
        .def_readwrite("interpolation", &SchemeSpec::interpolation)
        .def_readwrite("h_f", &SchemeSpec::h_f)
        .def_readwrite("h_s", &SchemeSpec::h_s)
        .def_readwrite("epsilon", &SchemeSpec::epsilon)
        .def_readwrite("max_passes", &SchemeSpec::max_passes)
        .def("ratio", &SchemeSpec::ratio)
        .def("validate", &SchemeSpec::validate);

    py::class_<ModeSet>(mod, "ModeSet")
        .def_readonly("eigenvalues", &ModeSet::eigenvalues)
        .def_readonly("V", &ModeSet::V)
        .def_readonly("W", &ModeSet::W)
        .def_readonly("diagonalizable", &ModeSet::diagonalizable);

    py::class_<ParticipationMatrices>(mod, "ParticipationMatrices")
        .def_readonly("P_x", &ParticipationMatrices::P_x)
        .def_readonly("P_y", &ParticipationMatrices::P_y)
        .def_readonly("dominant_state_mode", &ParticipationMatrices::dominant_state_mode)
        .def_readonly("dominant_alg_mode", &ParticipationMatrices::dominant_alg_mode)
        .def_readonly("zero_row_algs", &ParticipationMatrices::zero_row_algs);

    py::class_<PencilPair>(mod, "PencilPair")
        .def_readonly("F", &PencilPair::F)
        .def_readonly("G", &PencilPair::G)
        .def_readonly("r", &PencilPair::r)
        .def_readonly("h_f", &PencilPair::h_f)
        .def_readonly("block_layout", &PencilPair::block_layout);

    py::class_<PencilSpectrum>(mod, "PencilSpectrum")
        .def_readonly("z", &PencilSpectrum::z)
        .def_readonly("s_hat", &PencilSpectrum::s_hat)
        .def_readonly("infinite_count", &PencilSpectrum::infinite_count)
        .def_readonly("near_zero_count", &PencilSpectrum::near_zero_count)
        .def("spectral_radius", &PencilSpectrum::spectral_radius);

    py::class_<ModeMatch>(mod, "ModeMatch")
        .def_readonly("s", &ModeMatch::s)
        .def_readonly("s_hat", &ModeMatch::s_hat)
        .def_readonly("z", &ModeMatch::z)
        .def_readonly("rel_deform", &ModeMatch::rel_deform)
        .def_readonly("re_deform", &ModeMatch::re_deform)
        .def_readonly("im_deform", &ModeMatch::im_deform)
        .def_readonly("matched", &ModeMatch::matched)
        .def_readonly("nyquist_warning", &ModeMatch::nyquist_warning);

    py::class_<DeformationReport>(mod, "DeformationReport")
        .def_readonly("matches", &DeformationReport::matches)
        .def_readonly("spectral_radius", &DeformationReport::spectral_radius)
        .def_readonly("stable", &DeformationReport::stable)
        .def("dominant", [](const DeformationReport& r) -> std::optional<ModeMatch> {
            const ModeMatch* mm = r.dominant();
            if (!mm) return std::nullopt;
            return *mm;
        });

    py::class_<StepMeta>(mod, "StepMeta")
        .def_readonly("passes", &StepMeta::passes)
        .def_readonly("newton_iterations", &StepMeta::newton_iterations)
        .def_readonly("factorizations", &StepMeta::factorizations)
        .def_readonly("interp_fallback", &StepMeta::interp_fallback)
        .def_readonly("pass_cap_exceeded", &StepMeta::pass_cap_exceeded)
        .def_readonly("final_mismatch", &StepMeta::final_mismatch);

    py::class_<Trajectory>(mod, "Trajectory")
        .def_readonly("t", &Trajectory::t)
        .def_readonly("x", &Trajectory::x)
        .def_readonly("y", &Trajectory::y)
        .def_readonly("residual_slow", &Trajectory::residual_slow)
        .def_readonly("macro_meta", &Trajectory::macro_meta)
        .def_readonly("state_names", &Trajectory::state_names)
        .def_readonly("alg_names", &Trajectory::alg_names)
        .def("samples", &Trajectory::samples)
        .def("value", &Trajectory::value)
        .def("factorization_totals", &Trajectory::factorization_totals);

    py::class_<Event>(mod, "Event")
        .def(py::init([](double t, const std::string& parameter, double value) {
                 return Event{t, parameter, value};
             }),
             py::arg("t"), py::arg("parameter"), py::arg("value"))
        .def_readwrite("t", &Event::t)
        .def_readwrite("parameter", &Event::parameter)
        .def_readwrite("value", &Event::value);

    mod.def("builtin_linear", &builtin_linear);
    mod.def("builtin_nonlinear", &builtin_nonlinear);
    mod.def("as_nonlinear", &as_nonlinear);
    mod.def("linearize", [](const NonlinearModel& m, const Vector& x, const Vector& y) {
        return linearize(m, x, y).dae;
    });
    mod.def("reduce_state_matrix", &reduce_state_matrix);
    mod.def("eig_reduced", &eig_reduced);
    mod.def("participation_matrices", &participation_matrices);
    mod.def("pf_partition", &pf_partition, py::arg("lin"), py::arg("delta"));
    mod.def("damping_ratio", &damping_ratio);
    mod.def(
        "assemble_pencil",
        [](const LinearDae& lin, const Partition& part, const SchemeSpec& scheme) {
            return assemble_pencil(apply_partition(lin, part), scheme);
        },
        py::arg("lin"), py::arg("partition"), py::arg("scheme"));
    mod.def("solve_pencil", &solve_pencil);
    mod.def("deformation_report", &deformation_report);
    mod.def("run_multirate",
            py::overload_cast<const NonlinearModel&, const SchemeSpec&, const Partition&,
                              double>(&run_multirate));
    mod.def("run_reference",
            py::overload_cast<const NonlinearModel&, double, double>(&run_reference));
    mod.def("trajectory_error", &trajectory_error);
    mod.def("verify_pencil_consistency",
            py::overload_cast<const LinearDae&, const Partition&, SchemeSpec, int>(
                &verify_pencil_consistency));
    mod.def("factorization_cost", [](const SchemeSpec& scheme, const Dims& dims) {
        const CostTable t = factorization_cost(scheme, dims);
        py::dict out;
        for (const CostRow* row :
             {&t.single_rate, &t.explicit_predictor, &t.implicit_predictor})
            out[row->label.c_str()] = row->factorizations;
        return out;
    });
}
