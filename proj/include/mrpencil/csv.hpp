#pragma once

#include "mrpencil/modal.hpp"
#include "mrpencil/multirate.hpp"
#include "mrpencil/pencil.hpp"

namespace mrpencil {
namespace csv {

/// Fixed %.12e float formatting so repeated runs are byte-identical.
std::string fmt(double v);

std::string modes_table(const ModeSet& modes);
std::string participation_table(const ComplexMatrix& P, const std::vector<std::string>& row_names);
std::string spectrum_table(const DeformationReport& report);
std::string sweep_table(const std::vector<SweepRow>& rows);
std::string trajectory_table(const Trajectory& traj);
std::string residual_table(const Trajectory& traj);
std::string error_table(const ErrorSeries& series);
std::string partition_summary(const LinearDae& lin, const Partition& part,
                              const ParticipationMatrices& pm, const ModeSet& modes,
                              double delta);

void write_file(const std::string& path, const std::string& content);

}  // namespace csv
}  // namespace mrpencil
