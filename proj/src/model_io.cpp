#include "mrpencil/model_io.hpp"

#include <fstream>

#include "json.hpp"

namespace mrpencil {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelError("failed to parse '" + path + "': " + e.what());
    }
    return j;
}

void dump_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

Matrix matrix_from_json(const json& j, int rows, int cols, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ModelError(what + ": expected " + std::to_string(rows) + " rows");
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ModelError(what + ": expected " + std::to_string(cols) + " columns in row " +
                             std::to_string(i));
        for (int k = 0; k < cols; ++k) M(i, k) = row[k].get<double>();
    }
    return M;
}

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        rows.push_back(row);
    }
    return rows;
}

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Vector vector_from_json(const json& j, int size, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != size)
        throw ModelError(what + ": expected " + std::to_string(size) + " entries");
    Vector v(size);
    for (int i = 0; i < size; ++i) v(i) = j[i].get<double>();
    return v;
}

std::vector<std::string> names_from_json(const json& j, int count, const std::string& prefix) {
    std::vector<std::string> names;
    if (j.is_array()) {
        for (const auto& e : j) names.push_back(e.get<std::string>());
        if (static_cast<int>(names.size()) != count)
            throw ModelError("name list does not match variable count");
    } else {
        for (int i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i));
    }
    return names;
}

LinearDae linear_from_json(const json& j) {
    LinearDae lin;
    lin.name = j.value("name", "model");
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    lin.dims = Dims{n, m, 0, n, 0, m};
    lin.f_x = matrix_from_json(j.at("f_x"), n, n, "f_x");
    lin.f_y = matrix_from_json(j.at("f_y"), n, m, "f_y");
    lin.g_x = matrix_from_json(j.at("g_x"), m, n, "g_x");
    lin.g_y = matrix_from_json(j.at("g_y"), m, m, "g_y");
    lin.state_names = names_from_json(j.value("state_names", json()), n, "x");
    lin.alg_names = names_from_json(j.value("alg_names", json()), m, "y");
    lin.validate();
    return lin;
}

NonlinearModel nonlinear_from_json(const json& j) {
    NonlinearModel model = builtin_nonlinear(j.at("name").get<std::string>());
    if (j.contains("parameters"))
        for (auto it = j["parameters"].begin(); it != j["parameters"].end(); ++it)
            model = model.with_parameter(it.key(), it.value().get<double>());
    if (j.contains("equilibrium")) {
        model.x_eq = vector_from_json(j["equilibrium"].at("x"), model.dims.n, "equilibrium.x");
        model.y_eq = vector_from_json(j["equilibrium"].at("y"), model.dims.m, "equilibrium.y");
    } else if (j.contains("parameters")) {
        // Parameters moved the equilibrium; re-polish from the stored one.
        find_equilibrium(model, model.x_eq, model.y_eq);
    }
    model.events.clear();
    if (j.contains("events"))
        for (const auto& e : j["events"])
            model.events.push_back(Event{e.at("t").get<double>(),
                                         e.at("parameter").get<std::string>(),
                                         e.at("value").get<double>()});
    return model;
}

}  // namespace

bool is_linear(const AnyModel& m) { return std::holds_alternative<LinearDae>(m); }

const Dims& model_dims(const AnyModel& m) {
    if (is_linear(m)) return std::get<LinearDae>(m).dims;
    return std::get<NonlinearModel>(m).dims;
}

AnyModel load_model(const std::string& path) {
    const json j = load_json(path);
    const std::string type = j.value("type", "linear");
    if (type == "linear") return linear_from_json(j);
    if (type == "builtin_nonlinear") return nonlinear_from_json(j);
    throw ModelError(path + ": unknown model type '" + type + "'");
}

AnyModel builtin_model(const std::string& name) {
    if (builtin_is_linear(name)) return builtin_linear(name);
    return builtin_nonlinear(name);
}

void save_model(const LinearDae& lin, const std::string& path) {
    lin.validate();
    json j;
    j["type"] = "linear";
    j["name"] = lin.name;
    j["n"] = lin.dims.n;
    j["m"] = lin.dims.m;
    j["f_x"] = matrix_to_json(lin.f_x);
    j["f_y"] = matrix_to_json(lin.f_y);
    j["g_x"] = matrix_to_json(lin.g_x);
    j["g_y"] = matrix_to_json(lin.g_y);
    j["state_names"] = lin.state_names;
    j["alg_names"] = lin.alg_names;
    dump_json(j, path);
}

void save_model(const NonlinearModel& model, const std::string& path) {
    json j;
    j["type"] = "builtin_nonlinear";
    j["name"] = model.name;
    j["parameters"] = model.params;
    j["equilibrium"] = {{"x", vector_to_json(model.x_eq)}, {"y", vector_to_json(model.y_eq)}};
    json events = json::array();
    for (const auto& e : model.events)
        events.push_back({{"t", e.t}, {"parameter", e.parameter}, {"value", e.value}});
    j["events"] = events;
    dump_json(j, path);
}

Partition load_partition(const std::string& path, const Dims& dims) {
    const json j = load_json(path);
    Partition part = Partition::all_slow(dims.n, dims.m);
    if (j.contains("fast_states"))
        for (const auto& e : j["fast_states"]) {
            const int idx = e.get<int>();
            if (idx < 0 || idx >= dims.n)
                throw ModelError(path + ": fast_states index " + std::to_string(idx) +
                                 " out of range");
            part.state_class[idx] = VarClass::Fast;
        }
    if (j.contains("fast_algebraics"))
        for (const auto& e : j["fast_algebraics"]) {
            const int idx = e.get<int>();
            if (idx < 0 || idx >= dims.m)
                throw ModelError(path + ": fast_algebraics index " + std::to_string(idx) +
                                 " out of range");
            part.alg_class[idx] = VarClass::Fast;
        }
    return part;
}

void save_partition(const Partition& part, const std::string& path) {
    json j;
    json fs = json::array(), fa = json::array();
    for (int i = 0; i < part.n(); ++i)
        if (part.state_class[i] == VarClass::Fast) fs.push_back(i);
    for (int i = 0; i < part.m(); ++i)
        if (part.alg_class[i] == VarClass::Fast) fa.push_back(i);
    j["fast_states"] = fs;
    j["fast_algebraics"] = fa;
    if (!part.zero_row_algs.empty()) j["zero_row_algebraics"] = part.zero_row_algs;
    dump_json(j, path);
}

SchemeSpec load_scheme(const std::string& path) {
    const json j = load_json(path);
    SchemeSpec s;
    if (j.contains("predictor")) s.predictor = method_from_string(j["predictor"]);
    if (j.contains("corrector_fast")) s.corrector_fast = method_from_string(j["corrector_fast"]);
    if (j.contains("corrector_slow")) s.corrector_slow = method_from_string(j["corrector_slow"]);
    if (j.contains("interpolation")) s.interpolation = interp_from_string(j["interpolation"]);
    s.h_f = j.value("h_f", s.h_f);
    s.h_s = j.value("h_s", s.h_s);
    s.epsilon = j.value("epsilon", s.epsilon);
    s.max_passes = j.value("max_passes", s.max_passes);
    s.validate();
    return s;
}

void save_scheme(const SchemeSpec& scheme, const std::string& path) {
    scheme.validate();
    json j;
    j["predictor"] = to_string(scheme.predictor);
    j["corrector_fast"] = to_string(scheme.corrector_fast);
    j["corrector_slow"] = to_string(scheme.corrector_slow);
    j["interpolation"] = to_string(scheme.interpolation);
    j["h_f"] = scheme.h_f;
    j["h_s"] = scheme.h_s;
    j["epsilon"] = scheme.epsilon;
    j["max_passes"] = scheme.max_passes;
    dump_json(j, path);
}

}  // namespace mrpencil
