#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace formpc {

/// Keep-out disk in the horizontal plane.
struct CircleObstacle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
  double margin = 0.0;

  double effective_radius() const { return radius + margin; }
};

struct Cylinder {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
};

struct SeparationSpec {
  double d_min = 1.0;
};

/// Vertical cylinder to its horizontal cross-section plus a safety margin.
CircleObstacle reduce_obstacle(const Cylinder& cylinder, double margin);

/// normal . p_step >= offset on the horizontal position at step 1..np.
struct HalfPlane {
  int step = 1;
  Eigen::Vector2d normal = Eigen::Vector2d::UnitX();
  double offset = 0.0;
  bool soft = true;

  double slack_at(const Eigen::Vector2d& p) const { return normal.dot(p) - offset; }
};

struct ConstraintSet {
  std::vector<HalfPlane> rows;
  std::vector<std::string> diagnostics;
};

/// Horizontal positions over a horizon, one row per step (row k-1 is step k).
using PlanarTrajectory = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Supporting half-plane of the keep-out disk at each linearization point:
/// n'(p_k - c) >= r_eff with n = (pbar_k - c)/|pbar_k - c|. A point at the
/// center falls back to n = +x and records a diagnostic.
ConstraintSet obstacle_constraints(const PlanarTrajectory& linearization,
                                   const CircleObstacle& obstacle);

/// n'(p_i,k - p_j,k) >= d_min with n along pbar_i,k - pbar_j,k; vehicle j
/// is `other`, held at its linearization point.
struct SeparationConstraint {
  int step = 1;
  Eigen::Vector2d normal = Eigen::Vector2d::UnitX();
  double distance = 0.0;
  Eigen::Vector2d other = Eigen::Vector2d::Zero();
  bool soft = true;

  /// The same row as a half-plane over p_i with p_j fixed.
  HalfPlane fixed_other() const {
    return HalfPlane{step, normal, distance + normal.dot(other), soft};
  }
};

struct SeparationSet {
  std::vector<SeparationConstraint> rows;
  std::vector<std::string> diagnostics;
};

SeparationSet separation_constraints(const PlanarTrajectory& pred_i,
                                     const PlanarTrajectory& pred_j,
                                     const SeparationSpec& spec);

/// Linearization points for a vehicle approaching an obstacle nearly dead
/// ahead are pushed sideways to at least `min_lateral` from the line through
/// the center along `travel` (to the left when exactly centered). The
/// resulting half-plane is still tangent to the disk; it only picks a side
/// so the sequential linearization cannot stall in front of the obstacle.
PlanarTrajectory side_biased_points(const PlanarTrajectory& linearization,
                                    const PlanarTrajectory& travel,
                                    const CircleObstacle& obstacle,
                                    double min_lateral);

struct Violation {
  enum class Kind { obstacle, separation };
  Kind kind = Kind::obstacle;
  int sample = 0;
  int vehicle = 0;
  int other = 0;  // obstacle index or second vehicle
  double distance = 0.0;
  double required = 0.0;
};

struct ClearanceReport {
  /// Smallest distance-to-disk (distance minus effective radius); absent
  /// without obstacles.
  std::optional<double> min_obstacle_clearance;
  /// Smallest pairwise horizontal distance; absent with a single vehicle.
  std::optional<double> min_pairwise_distance;
  std::vector<Violation> violations;
};

/// Exact Euclidean checks on realized, time-aligned horizontal trajectories.
/// Tangency (distance == r_eff, or == d_min) is not a violation.
ClearanceReport validate_clearance(const std::vector<PlanarTrajectory>& trajectories,
                                   const std::vector<CircleObstacle>& obstacles,
                                   const SeparationSpec& spec);

struct GuardResult {
  bool ok = true;
  std::string message;
};

/// Warns when the obstacle is narrower than one step of travel at v_max
/// (2 r_eff < v_max dt), in which case a sampled trajectory can jump it.
GuardResult feasibility_guard(const CircleObstacle& obstacle, double v_max,
                              double dt);

}  // namespace formpc
