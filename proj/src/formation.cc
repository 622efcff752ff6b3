#include "formpc/formation.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "formpc/errors.h"

namespace formpc {
namespace {

double segment_heading(const Waypoint& a, const Waypoint& b, bool& moving) {
  const Eigen::Vector3d v = (b.position - a.position) / (b.time - a.time);
  moving = v.head<2>().norm() > kHeadingSpeedEpsilon;
  return moving ? std::atan2(v.y(), v.x()) : 0.0;
}

// Heading of the closest moving segment at or before `seg`, else after it.
double resting_heading(const ReferencePath& path, std::size_t seg) {
  const auto& w = path.waypoints;
  if (w.size() < 2) return 0.0;
  seg = std::min(seg, w.size() - 2);
  for (std::size_t i = seg + 1; i-- > 0;) {
    bool moving = false;
    const double h = segment_heading(w[i], w[i + 1], moving);
    if (moving) return h;
  }
  for (std::size_t i = seg + 1; i + 1 < w.size(); ++i) {
    bool moving = false;
    const double h = segment_heading(w[i], w[i + 1], moving);
    if (moving) return h;
  }
  return 0.0;
}

}  // namespace

FormationGeometry FormationGeometry::triangle(double back, double side) {
  return FormationGeometry{{Eigen::Vector3d::Zero(), Eigen::Vector3d(-back, side, 0.0),
                            Eigen::Vector3d(-back, -side, 0.0)}};
}

void FormationGeometry::validate(double d_min) const {
  if (slots.empty()) throw ConfigError("slots", "formation needs at least one slot");
  if (!slots.front().isZero(0.0)) {
    throw ConfigError("slots", "slot 0 must be the origin");
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].allFinite()) throw ConfigError("slots", "non-finite offset");
    for (std::size_t j = i + 1; j < slots.size(); ++j) {
      const double dist = (slots[i] - slots[j]).head<2>().norm();
      if (dist < d_min) {
        throw ConfigError("slots", "slots " + std::to_string(i) + " and " +
                                       std::to_string(j) +
                                       " are closer than d_min");
      }
    }
  }
}

std::string_view to_string(FormationMode mode) {
  switch (mode) {
    case FormationMode::leader_follower:
      return "leader_follower";
    case FormationMode::virtual_structure:
      return "virtual_structure";
  }
  return "unknown";
}

FormationMode formation_mode_from_string(std::string_view name) {
  if (name == "leader_follower") return FormationMode::leader_follower;
  if (name == "virtual_structure") return FormationMode::virtual_structure;
  throw ConfigError("mode", "expected leader_follower or virtual_structure, got '" +
                                std::string(name) + "'");
}

void ReferencePath::validate() const {
  if (waypoints.empty()) throw ConfigError("waypoints", "path is empty");
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (!std::isfinite(waypoints[i].time) || !waypoints[i].position.allFinite()) {
      throw ConfigError("waypoints", "non-finite waypoint " + std::to_string(i));
    }
    if (i > 0 && !(waypoints[i].time > waypoints[i - 1].time)) {
      throw ConfigError("waypoints", "times must be strictly increasing");
    }
  }
}

VehicleState virtual_point(const ReferencePath& path, double t) {
  path.validate();
  const auto& w = path.waypoints;
  VehicleState s;
  if (w.size() == 1) {
    s.position = w.front().position;
    return s;
  }
  if (t < w.front().time) {
    s.position = w.front().position;
    s.heading = resting_heading(path, 0);
    return s;
  }
  if (t > w.back().time) {
    s.position = w.back().position;
    s.heading = resting_heading(path, w.size() - 2);
    return s;
  }
  // Segment i covers [t_i, t_{i+1}); the final instant uses the last segment.
  auto it = std::upper_bound(w.begin(), w.end(), t,
                             [](double v, const Waypoint& p) { return v < p.time; });
  std::size_t seg = static_cast<std::size_t>(it - w.begin());
  seg = seg == 0 ? 0 : seg - 1;
  seg = std::min(seg, w.size() - 2);
  const Waypoint& a = w[seg];
  const Waypoint& b = w[seg + 1];
  const double span = b.time - a.time;
  const double lambda = (t - a.time) / span;
  s.position = a.position + lambda * (b.position - a.position);
  s.velocity = (b.position - a.position) / span;
  s.heading = heading_from_velocity(s.velocity, resting_heading(path, seg));
  return s;
}

VehicleState slot_reference(const VehicleState& anchor,
                            const Eigen::Vector3d& offset) {
  const double c = std::cos(anchor.heading);
  const double s = std::sin(anchor.heading);
  VehicleState out = anchor;
  out.position.x() += c * offset.x() - s * offset.y();
  out.position.y() += s * offset.x() + c * offset.y();
  out.position.z() += offset.z();
  return out;
}

std::vector<HorizonReference> build_references(
    FormationMode mode, const FormationGeometry& geometry,
    const ReferencePath& path, const VehicleState& leader, double t, int np,
    double dt, int vehicle_count) {
  if (vehicle_count != geometry.size()) {
    throw ConfigError("slots", "vehicle count " + std::to_string(vehicle_count) +
                                   " does not match slot count " +
                                   std::to_string(geometry.size()));
  }
  std::vector<HorizonReference> refs(vehicle_count, HorizonReference(np, 6));
  for (int k = 1; k <= np; ++k) {
    const double tk = t + k * dt;
    const VehicleState vp = virtual_point(path, tk);
    VehicleState anchor = vp;
    if (mode == FormationMode::leader_follower) {
      anchor = leader;
      anchor.position = leader.position + leader.velocity * (k * dt);
    }
    for (int i = 0; i < vehicle_count; ++i) {
      const VehicleState r = (mode == FormationMode::leader_follower && i == 0)
                                 ? vp
                                 : slot_reference(anchor, geometry.slots[i]);
      refs[i].row(k - 1) << r.position.transpose(), r.velocity.transpose();
    }
  }
  return refs;
}

Eigen::VectorXd stack_reference(const HorizonReference& ref) {
  Eigen::VectorXd out(ref.size());
  for (Eigen::Index k = 0; k < ref.rows(); ++k) {
    out.segment(k * ref.cols(), ref.cols()) = ref.row(k).transpose();
  }
  return out;
}

FormationError formation_error(const std::vector<VehicleState>& states,
                               const FormationGeometry& geometry,
                               const VehicleState& anchor) {
  FormationError out;
  double sum_sq = 0.0;
  const std::size_t count = std::min(states.size(), geometry.slots.size());
  for (std::size_t i = 0; i < count; ++i) {
    const Eigen::Vector3d target = slot_reference(anchor, geometry.slots[i]).position;
    const double e = (states[i].position - target).norm();
    out.per_vehicle.push_back(e);
    sum_sq += e * e;
  }
  out.rms = count == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(count));
  return out;
}

VehicleState formation_anchor(FormationMode mode, const ReferencePath& path,
                              const VehicleState& leader, double t) {
  return mode == FormationMode::leader_follower ? leader : virtual_point(path, t);
}

}  // namespace formpc
