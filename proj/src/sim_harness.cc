#include "formpc/sim_harness.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "formpc/errors.h"
#include "formpc/formation.h"
#include "formpc/mpc_core.h"

namespace formpc {
namespace {

constexpr int kStateDim = 6;
constexpr int kInputDim = 3;

// Linearized keep-out rows are tightened by this much so that the exact
// distance check passes when the solver lands on the boundary.
constexpr double kConstraintBuffer = 1e-6;

// Minimum lateral offset of linearization points that approach an obstacle
// head-on, as a fraction of its effective radius.
constexpr double kHeadOnLateralFraction = 0.25;

MpcConfig stack_config(const MpcConfig& c, int count) {
  const int n = static_cast<int>(c.Q.rows());
  const int m = static_cast<int>(c.R.rows());
  const int p = static_cast<int>(c.y_min.size());
  MpcConfig out = c;
  out.Q = Eigen::MatrixXd::Zero(n * count, n * count);
  out.P = Eigen::MatrixXd::Zero(n * count, n * count);
  out.R = Eigen::MatrixXd::Zero(m * count, m * count);
  out.K = Eigen::MatrixXd::Zero(m * count, n * count);
  out.u_min.resize(m * count);
  out.u_max.resize(m * count);
  out.y_min.resize(p * count);
  out.y_max.resize(p * count);
  for (int i = 0; i < count; ++i) {
    out.Q.block(i * n, i * n, n, n) = c.Q;
    out.P.block(i * n, i * n, n, n) = c.P;
    out.R.block(i * m, i * m, m, m) = c.R;
    out.K.block(i * m, i * n, m, n) = c.K;
    out.u_min.segment(i * m, m) = c.u_min;
    out.u_max.segment(i * m, m) = c.u_max;
    out.y_min.segment(i * p, p) = c.y_min;
    out.y_max.segment(i * p, p) = c.y_max;
  }
  return out;
}

// Reference state (position, velocity) each vehicle tracks at time t itself.
std::vector<Eigen::VectorXd> current_references(const Scenario& sc,
                                                const VehicleState& leader, double t) {
  std::vector<Eigen::VectorXd> refs;
  const VehicleState vp = virtual_point(sc.path, t);
  for (int i = 0; i < sc.vehicle_count(); ++i) {
    VehicleState r;
    if (sc.mode == FormationMode::leader_follower) {
      r = i == 0 ? vp : slot_reference(leader, sc.geometry.slots[i]);
    } else {
      r = slot_reference(vp, sc.geometry.slots[i]);
    }
    refs.push_back(to_state_vector(r));
  }
  return refs;
}

PlanarTrajectory planar_block(const Eigen::MatrixXd& predicted, int vehicle) {
  PlanarTrajectory out(predicted.rows(), 2);
  out.col(0) = predicted.col(vehicle * kStateDim);
  out.col(1) = predicted.col(vehicle * kStateDim + 1);
  return out;
}

PlanarTrajectory travel_directions(const HorizonReference& ref) {
  PlanarTrajectory out(ref.rows(), 2);
  out.col(0) = ref.col(3);
  out.col(1) = ref.col(4);
  return out;
}

// normal . p_vehicle >= offset  ->  -normal . p <= -offset, over the state of
// `vehicle` inside a state vector of `state_dim` entries.
LinearInequality half_plane_row(const HalfPlane& h, int vehicle, int state_dim) {
  LinearInequality row;
  row.step = h.step;
  row.coeffs = Eigen::VectorXd::Zero(state_dim);
  row.coeffs(vehicle * kStateDim) = -h.normal.x();
  row.coeffs(vehicle * kStateDim + 1) = -h.normal.y();
  row.bound = -(h.offset + kConstraintBuffer);
  row.soft = h.soft;
  return row;
}

// normal . (p_i - p_j) >= d_min over the stacked state.
LinearInequality pair_row(const SeparationConstraint& c, int i, int j, int state_dim) {
  LinearInequality row;
  row.step = c.step;
  row.coeffs = Eigen::VectorXd::Zero(state_dim);
  row.coeffs(i * kStateDim) = -c.normal.x();
  row.coeffs(i * kStateDim + 1) = -c.normal.y();
  row.coeffs(j * kStateDim) = c.normal.x();
  row.coeffs(j * kStateDim + 1) = c.normal.y();
  row.bound = -(c.distance + kConstraintBuffer);
  row.soft = c.soft;
  return row;
}

void append_obstacle_rows(const Scenario& sc, const PlanarTrajectory& lin,
                          const PlanarTrajectory& travel, int vehicle, int state_dim,
                          std::vector<LinearInequality>& rows,
                          std::vector<std::string>& diagnostics) {
  const double activation = sc.effective_activation_distance();
  for (const auto& obstacle : sc.obstacles) {
    const double r_eff = obstacle.effective_radius();
    const PlanarTrajectory points =
        side_biased_points(lin, travel, obstacle, kHeadOnLateralFraction * r_eff);
    ConstraintSet set = obstacle_constraints(points, obstacle);
    for (auto& d : set.diagnostics) diagnostics.push_back(std::move(d));
    for (const auto& h : set.rows) {
      const Eigen::Vector2d p = lin.row(h.step - 1).transpose();
      if ((p - obstacle.center).norm() - r_eff > activation) continue;
      rows.push_back(half_plane_row(h, vehicle, state_dim));
    }
  }
}

}  // namespace

Eigen::Vector3d inner_loop(const Eigen::Vector3d& command, const ActuatorLimits& limits) {
  return command.cwiseMax(-limits.a_max).cwiseMin(limits.a_max);
}

std::vector<PlanarTrajectory> planar_trajectories(const TrajectoryLog& log) {
  std::vector<PlanarTrajectory> out(log.vehicle_count,
                                    PlanarTrajectory(static_cast<Eigen::Index>(log.steps.size()), 2));
  for (std::size_t s = 0; s < log.steps.size(); ++s) {
    for (int v = 0; v < log.vehicle_count; ++v) {
      out[v].row(static_cast<Eigen::Index>(s)) =
          log.steps[s].vehicles[v].position.head<2>().transpose();
    }
  }
  return out;
}

RunResult run_scenario(const Scenario& sc) {
  sc.validate();
  const int count = sc.vehicle_count();
  const StateSpaceModel model = double_integrator_3d(sc.dt);
  const MpcConfig config = vehicle_mpc_config(sc);
  const bool centralized = sc.control_mode == ControlMode::centralized;
  const double activation = sc.effective_activation_distance();

  std::unique_ptr<Controller> central;
  std::vector<Controller> locals;
  if (centralized) {
    central = std::make_unique<Controller>(replicate(model, count),
                                           stack_config(config, count));
  } else {
    for (int i = 0; i < count; ++i) locals.emplace_back(model, config);
  }

  std::vector<Eigen::VectorXd> x(count);
  std::vector<double> heading(count);
  for (int i = 0; i < count; ++i) {
    x[i] = to_state_vector(sc.initial_states[i]);
    heading[i] = sc.initial_states[i].heading;
  }

  RunResult result;
  result.log.vehicle_count = count;
  result.log.obstacles = sc.obstacles;
  result.log.separation = sc.separation;
  const int steps = sc.step_count();
  const int np = config.np;

  for (int s = 0; s <= steps; ++s) {
    const double t = s * sc.dt;
    std::vector<VehicleState> states(count);
    for (int i = 0; i < count; ++i) {
      states[i] = to_vehicle_state(x[i], heading[i]);
      heading[i] = states[i].heading;
    }
    const VehicleState& leader = states.front();
    const auto refs = build_references(sc.mode, sc.geometry, sc.path, leader, t, np,
                                       sc.dt, count);

    Eigen::VectorXd x_stacked(count * kStateDim);
    for (int i = 0; i < count; ++i) x_stacked.segment(i * kStateDim, kStateDim) = x[i];

    // Linearization points: the previous plans shifted by one sample.
    std::vector<PlanarTrajectory> lin(count);
    if (centralized) {
      const Eigen::MatrixXd preview = central->preview(x_stacked);
      for (int i = 0; i < count; ++i) lin[i] = planar_block(preview, i);
    } else {
      for (int i = 0; i < count; ++i) lin[i] = planar_block(locals[i].preview(x[i]), 0);
    }

    std::vector<Eigen::Vector3d> commands(count);
    std::vector<QpDiagnostics> diags(count);
    if (centralized) {
      const int dim = count * kStateDim;
      std::vector<LinearInequality> rows;
      for (int i = 0; i < count; ++i) {
        append_obstacle_rows(sc, lin[i], travel_directions(refs[i]), i, dim, rows,
                             result.diagnostics);
      }
      for (int i = 0; i < count; ++i) {
        for (int j = i + 1; j < count; ++j) {
          SeparationSet set = separation_constraints(lin[i], lin[j], sc.separation);
          for (auto& d : set.diagnostics) result.diagnostics.push_back(std::move(d));
          for (const auto& c : set.rows) {
            const double dist = (lin[i].row(c.step - 1) - lin[j].row(c.step - 1)).norm();
            if (dist - sc.separation.d_min > activation) continue;
            rows.push_back(pair_row(c, i, j, dim));
          }
        }
      }
      Eigen::VectorXd x_ref(np * dim);
      for (int k = 0; k < np; ++k) {
        for (int i = 0; i < count; ++i) {
          x_ref.segment(k * dim + i * kStateDim, kStateDim) = refs[i].row(k).transpose();
        }
      }
      const StepResult r = central->step(x_stacked, x_ref, rows);
      for (int i = 0; i < count; ++i) {
        commands[i] = r.input.segment<kInputDim>(i * kInputDim);
        diags[i] = r.diagnostics;
      }
    } else {
      // Jacobi sweep: every vehicle sees the neighbours' plans from the
      // previous sample, so the per-vehicle solves are independent.
      for (int i = 0; i < count; ++i) {
        std::vector<LinearInequality> rows;
        append_obstacle_rows(sc, lin[i], travel_directions(refs[i]), 0, kStateDim, rows,
                             result.diagnostics);
        for (int j = 0; j < count; ++j) {
          if (j == i) continue;
          SeparationSet set = separation_constraints(lin[i], lin[j], sc.separation);
          for (auto& d : set.diagnostics) result.diagnostics.push_back(std::move(d));
          for (const auto& c : set.rows) {
            const double dist = (lin[i].row(c.step - 1) - lin[j].row(c.step - 1)).norm();
            if (dist - sc.separation.d_min > activation) continue;
            rows.push_back(half_plane_row(c.fixed_other(), 0, kStateDim));
          }
        }
        const StepResult r = locals[i].step(x[i], stack_reference(refs[i]), rows);
        commands[i] = r.input.head<kInputDim>();
        diags[i] = r.diagnostics;
      }
    }

    // Log the sample.
    StepRecord rec;
    rec.step = s;
    rec.time = t;
    const VehicleState anchor = formation_anchor(sc.mode, sc.path, leader, t);
    const FormationError ferr = formation_error(states, sc.geometry, anchor);
    const auto now_refs = current_references(sc, leader, t);
    rec.formation_rms = ferr.rms;
    for (int i = 0; i < count; ++i) {
      VehicleRecord v;
      v.position = states[i].position;
      v.velocity = states[i].velocity;
      v.input = inner_loop(commands[i], sc.limits);
      v.reference = now_refs[i].head<3>();
      v.formation_error = ferr.per_vehicle[i];
      const Eigen::VectorXd e = x[i] - now_refs[i];
      v.stage_cost = e.dot(config.Q * e) + v.input.dot(config.R * v.input);
      v.diagnostics = diags[i];
      rec.vehicles.push_back(v);
    }
    for (int i = 0; i < count; ++i) {
      const Eigen::Vector2d p = states[i].position.head<2>();
      for (const auto& o : sc.obstacles) {
        const double c = (p - o.center).norm() - o.effective_radius();
        if (!rec.min_obstacle_clearance || c < *rec.min_obstacle_clearance) {
          rec.min_obstacle_clearance = c;
        }
      }
      for (int j = i + 1; j < count; ++j) {
        const double d = (p - states[j].position.head<2>()).norm();
        if (!rec.min_pairwise_distance || d < *rec.min_pairwise_distance) {
          rec.min_pairwise_distance = d;
        }
      }
    }
    // Apply the inputs.
    if (s < steps) {
      for (int i = 0; i < count; ++i) {
        x[i] = step(model, x[i], rec.vehicles[i].input);
      }
    }
    result.log.steps.push_back(std::move(rec));
  }

  std::sort(result.diagnostics.begin(), result.diagnostics.end());
  result.diagnostics.erase(std::unique(result.diagnostics.begin(), result.diagnostics.end()),
                           result.diagnostics.end());
  result.metrics = compute_metrics(result.log);
  return result;
}

Metrics compute_metrics(const TrajectoryLog& log) {
  Metrics m;
  m.samples = static_cast<int>(log.steps.size());
  if (log.steps.empty()) return m;

  const double final_time = log.steps.back().time;
  double sum_sq = 0.0;
  double tail_sq = 0.0;
  int tail_count = 0;
  double iterations = 0.0;
  int solves = 0;
  for (const auto& rec : log.steps) {
    sum_sq += rec.formation_rms * rec.formation_rms;
    if (rec.time >= 0.75 * final_time) {
      tail_sq += rec.formation_rms * rec.formation_rms;
      ++tail_count;
    }
    for (const auto& v : rec.vehicles) {
      m.max_formation_error = std::max(m.max_formation_error, v.formation_error);
      m.total_cost += v.stage_cost;
      iterations += v.diagnostics.iterations;
      ++solves;
      if (!v.diagnostics.converged) ++m.nonconverged_solves;
    }
  }
  m.formation_error_rms = std::sqrt(sum_sq / static_cast<double>(log.steps.size()));
  m.formation_error_rms_final_quarter =
      tail_count > 0 ? std::sqrt(tail_sq / tail_count) : 0.0;
  m.mean_solver_iterations = solves > 0 ? iterations / solves : 0.0;

  const ClearanceReport report =
      validate_clearance(planar_trajectories(log), log.obstacles, log.separation);
  m.min_separation = report.min_pairwise_distance;
  m.min_obstacle_clearance = report.min_obstacle_clearance;
  m.violation_count = static_cast<int>(report.violations.size());
  return m;
}

Metrics compute_metrics(const TrajectoryLog& log, const Scenario& scenario) {
  TrajectoryLog copy = log;
  copy.obstacles = scenario.obstacles;
  copy.separation = scenario.separation;
  return compute_metrics(copy);
}

}  // namespace formpc
