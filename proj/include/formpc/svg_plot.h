#pragma once

#include <string>

#include "formpc/sim_harness.h"

namespace formpc {

/// Top-down view: one polyline per vehicle, obstacles as circles.
std::string xy_trajectories_svg(const TrajectoryLog& log);

/// Formation-error RMS against time; a second panel shows the minimum
/// pairwise distance when the log has more than one vehicle.
std::string formation_error_svg(const TrajectoryLog& log);

}  // namespace formpc
