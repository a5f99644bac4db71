#pragma once

#include <variant>

#include "mrpencil/nonlinear.hpp"
#include "mrpencil/scheme.hpp"

namespace mrpencil {

using AnyModel = std::variant<LinearDae, NonlinearModel>;

bool is_linear(const AnyModel& m);
const Dims& model_dims(const AnyModel& m);

/// Load a model file (linear matrices or builtin-nonlinear parameterization).
AnyModel load_model(const std::string& path);

/// Builtin by name: decoupled2, coupled_stiff, smib_avr.
AnyModel builtin_model(const std::string& name);

void save_model(const LinearDae& lin, const std::string& path);
void save_model(const NonlinearModel& model, const std::string& path);

/// Partition file: {"fast_states": [...], "fast_algebraics": [...]},
/// unlisted variables are Slow.
Partition load_partition(const std::string& path, const Dims& dims);
void save_partition(const Partition& part, const std::string& path);

/// Scheme configuration JSON.
SchemeSpec load_scheme(const std::string& path);
void save_scheme(const SchemeSpec& scheme, const std::string& path);

}  // namespace mrpencil
