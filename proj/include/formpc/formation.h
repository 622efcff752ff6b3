#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "formpc/vehicle_models.h"

namespace formpc {

/// Body-frame slot offsets (x forward, y left, z up). Slot 0 is the leader
/// or the virtual point itself and must be the origin.
struct FormationGeometry {
  std::vector<Eigen::Vector3d> slots;

  /// Leader ahead, two followers behind: (0,0,0), (-5,+5,0), (-5,-5,0).
  static FormationGeometry triangle(double back = 5.0, double side = 5.0);

  int size() const { return static_cast<int>(slots.size()); }

  /// Throws ConfigError unless slot 0 is zero and all pairwise horizontal
  /// slot distances are >= d_min.
  void validate(double d_min) const;
};

enum class FormationMode { leader_follower, virtual_structure };

std::string_view to_string(FormationMode mode);
FormationMode formation_mode_from_string(std::string_view name);

struct Waypoint {
  double time = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::optional<double> speed;
};

/// Piecewise-linear path through timed waypoints.
struct ReferencePath {
  std::vector<Waypoint> waypoints;

  /// Throws ConfigError for an empty path, non-increasing times or
  /// non-finite coordinates.
  void validate() const;
  double start_time() const { return waypoints.front().time; }
  double end_time() const { return waypoints.back().time; }
};

/// Moving reference point at time t (clamped to the path's time span).
/// Velocity is the active segment's finite difference and is zero once the
/// path is clamped; heading follows the nearest moving segment.
VehicleState virtual_point(const ReferencePath& path, double t);

/// Anchor position plus the offset rotated by the anchor's heading about the
/// vertical axis; velocity and heading copy the anchor.
VehicleState slot_reference(const VehicleState& anchor,
                            const Eigen::Vector3d& offset);

/// Per-vehicle references over k = 1..np, each stacked as np x 6
/// (position, velocity) rows.
using HorizonReference = Eigen::MatrixXd;

/// Leader-follower: slot 0 tracks the path; followers track their slot
/// around the leader's measured state extrapolated at constant velocity.
/// Virtual structure: every slot tracks the virtual point at t + k dt.
std::vector<HorizonReference> build_references(
    FormationMode mode, const FormationGeometry& geometry,
    const ReferencePath& path, const VehicleState& leader, double t, int np,
    double dt, int vehicle_count);

/// Row-major stacking of a horizon reference into the MPC x_ref layout.
Eigen::VectorXd stack_reference(const HorizonReference& ref);

struct FormationError {
  std::vector<double> per_vehicle;
  double rms = 0.0;
};

/// Euclidean distance of each vehicle to its slot around
/// `anchor` (leader state or virtual point), and the RMS over vehicles.
FormationError formation_error(const std::vector<VehicleState>& states,
                               const FormationGeometry& geometry,
                               const VehicleState& anchor);

/// The anchor used for formation bookkeeping at time t.
VehicleState formation_anchor(FormationMode mode, const ReferencePath& path,
                              const VehicleState& leader, double t);

}  // namespace formpc
