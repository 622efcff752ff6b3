#include "formpc/avoidance.h"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "formpc/errors.h"

namespace formpc {
namespace {

constexpr double kDegenerateDistance = 1e-12;

}  // namespace

CircleObstacle reduce_obstacle(const Cylinder& cylinder, double margin) {
  if (!(cylinder.radius > 0.0) || !std::isfinite(cylinder.radius)) {
    throw ConfigError("radius", "obstacle radius must be positive");
  }
  if (!(margin >= 0.0) || !std::isfinite(margin)) {
    throw ConfigError("margin", "obstacle margin must be nonnegative");
  }
  if (!cylinder.center.allFinite()) {
    throw ConfigError("center", "obstacle center must be finite");
  }
  return CircleObstacle{cylinder.center, cylinder.radius, margin};
}

ConstraintSet obstacle_constraints(const PlanarTrajectory& linearization,
                                   const CircleObstacle& obstacle) {
  ConstraintSet out;
  const double r_eff = obstacle.effective_radius();
  for (Eigen::Index k = 0; k < linearization.rows(); ++k) {
    const Eigen::Vector2d delta = linearization.row(k).transpose() - obstacle.center;
    const double dist = delta.norm();
    Eigen::Vector2d normal = Eigen::Vector2d::UnitX();
    if (dist > kDegenerateDistance) {
      normal = delta / dist;
    } else {
      out.diagnostics.push_back(fmt::format(
          "step {}: linearization point at obstacle center ({}, {}); using +x normal",
          k + 1, obstacle.center.x(), obstacle.center.y()));
    }
    out.rows.push_back(HalfPlane{static_cast<int>(k) + 1, normal,
                                 r_eff + normal.dot(obstacle.center), true});
  }
  return out;
}

SeparationSet separation_constraints(const PlanarTrajectory& pred_i,
                                     const PlanarTrajectory& pred_j,
                                     const SeparationSpec& spec) {
  if (pred_i.rows() != pred_j.rows()) {
    throw ConfigError("predictions", "separation predictions differ in length");
  }
  SeparationSet out;
  for (Eigen::Index k = 0; k < pred_i.rows(); ++k) {
    const Eigen::Vector2d pi = pred_i.row(k).transpose();
    const Eigen::Vector2d pj = pred_j.row(k).transpose();
    const Eigen::Vector2d delta = pi - pj;
    const double dist = delta.norm();
    Eigen::Vector2d normal = Eigen::Vector2d::UnitX();
    if (dist > kDegenerateDistance) {
      normal = delta / dist;
    } else {
      out.diagnostics.push_back(fmt::format(
          "step {}: coincident linearization pair; using +x normal", k + 1));
    }
    out.rows.push_back(SeparationConstraint{static_cast<int>(k) + 1, normal,
                                            spec.d_min, pj, true});
  }
  return out;
}

PlanarTrajectory side_biased_points(const PlanarTrajectory& linearization,
                                    const PlanarTrajectory& travel,
                                    const CircleObstacle& obstacle,
                                    double min_lateral) {
  PlanarTrajectory out = linearization;
  for (Eigen::Index k = 0; k < out.rows() && k < travel.rows(); ++k) {
    const Eigen::Vector2d dir = travel.row(k).transpose();
    const double speed = dir.norm();
    if (speed < 1e-9) continue;
    const Eigen::Vector2d t = dir / speed;
    const Eigen::Vector2d left(-t.y(), t.x());
    const Eigen::Vector2d delta = out.row(k).transpose() - obstacle.center;
    const double along = delta.dot(t);
    if (along >= 0.0) continue;  // already abeam or past the center
    const double lateral = delta.dot(left);
    if (std::abs(lateral) >= min_lateral) continue;
    const double side = lateral > -1e-9 ? 1.0 : -1.0;
    const Eigen::Vector2d moved = obstacle.center + along * t + side * min_lateral * left;
    out.row(k) = moved.transpose();
  }
  return out;
}

ClearanceReport validate_clearance(const std::vector<PlanarTrajectory>& trajectories,
                                   const std::vector<CircleObstacle>& obstacles,
                                   const SeparationSpec& spec) {
  ClearanceReport report;
  Eigen::Index samples = std::numeric_limits<Eigen::Index>::max();
  for (const auto& t : trajectories) samples = std::min(samples, t.rows());
  if (trajectories.empty()) samples = 0;

  for (Eigen::Index s = 0; s < samples; ++s) {
    for (std::size_t v = 0; v < trajectories.size(); ++v) {
      const Eigen::Vector2d p = trajectories[v].row(s).transpose();
      for (std::size_t o = 0; o < obstacles.size(); ++o) {
        const double r_eff = obstacles[o].effective_radius();
        const double dist = (p - obstacles[o].center).norm();
        const double clearance = dist - r_eff;
        if (!report.min_obstacle_clearance || clearance < *report.min_obstacle_clearance) {
          report.min_obstacle_clearance = clearance;
        }
        if (dist < r_eff) {
          report.violations.push_back(Violation{Violation::Kind::obstacle,
                                                static_cast<int>(s), static_cast<int>(v),
                                                static_cast<int>(o), dist, r_eff});
        }
      }
      for (std::size_t w = v + 1; w < trajectories.size(); ++w) {
        const double dist = (p - trajectories[w].row(s).transpose()).norm();
        if (!report.min_pairwise_distance || dist < *report.min_pairwise_distance) {
          report.min_pairwise_distance = dist;
        }
        if (dist < spec.d_min) {
          report.violations.push_back(Violation{Violation::Kind::separation,
                                                static_cast<int>(s), static_cast<int>(v),
                                                static_cast<int>(w), dist, spec.d_min});
        }
      }
    }
  }
  return report;
}

GuardResult feasibility_guard(const CircleObstacle& obstacle, double v_max,
                              double dt) {
  const double diameter = 2.0 * obstacle.effective_radius();
  const double step = v_max * dt;
  if (diameter < step) {
    return GuardResult{
        false,
        fmt::format("obstacle at ({}, {}) has effective diameter {} m but one step "
                    "at v_max covers {} m; reduce dt below {} s or raise the margin "
                    "to at least {} m",
                    obstacle.center.x(), obstacle.center.y(), diameter, step,
                    diameter / v_max, std::max(0.0, 0.5 * step - obstacle.radius))};
  }
  return GuardResult{true, {}};
}

}  // namespace formpc
