#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "formpc/sim_harness.h"

namespace formpc {

/// Fixed CSV header, one row per (step, vehicle).
extern const char* const kTrajectoryCsvHeader;

/// Writes the log as CSV. Preamble lines starting with '#' carry the
/// separation distance and the obstacles so the file is self-contained.
/// Floats use 17 significant digits, so write -> read is exact. Absent
/// values (no obstacle, single vehicle) are empty fields.
void write_trajectory_csv(const TrajectoryLog& log, std::ostream& out);
void write_trajectory_csv(const TrajectoryLog& log, const std::filesystem::path& path);

/// Throws ConfigError on malformed or empty input.
TrajectoryLog read_trajectory_csv(std::istream& in);
TrajectoryLog read_trajectory_csv(const std::filesystem::path& path);

/// Stable machine-readable metrics document.
std::string metrics_json(const Metrics& metrics);

}  // namespace formpc
