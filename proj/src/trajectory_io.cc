#include "formpc/trajectory_io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "formpc/errors.h"

namespace formpc {

const char* const kTrajectoryCsvHeader =
    "step,time,vehicle,px,py,pz,vx,vy,vz,ax,ay,az,ref_px,ref_py,ref_pz,"
    "formation_error,formation_rms,min_pairwise_distance,min_obstacle_clearance,"
    "stage_cost,solver_iterations,solver_residual,solver_converged";

namespace {

constexpr int kColumns = 23;

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("csv", fmt::format("line {}: invalid number '{}'", line, s));
  }
  return v;
}

int parse_int(const std::string& s, int line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("csv", fmt::format("line {}: invalid integer '{}'", line, s));
  }
  return v;
}

std::optional<double> parse_opt(const std::string& s, int line) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, line);
}

Eigen::Vector3d vec3(const std::vector<std::string>& f, int at, int line) {
  return {parse_double(f[at], line), parse_double(f[at + 1], line),
          parse_double(f[at + 2], line)};
}

}  // namespace

void write_trajectory_csv(const TrajectoryLog& log, std::ostream& out) {
  out << "# formpc trajectory log v1\n";
  out << "# separation," << num(log.separation.d_min) << '\n';
  for (const auto& o : log.obstacles) {
    out << "# obstacle," << num(o.center.x()) << ',' << num(o.center.y()) << ','
        << num(o.radius) << ',' << num(o.margin) << '\n';
  }
  out << kTrajectoryCsvHeader << '\n';
  for (const auto& rec : log.steps) {
    for (std::size_t v = 0; v < rec.vehicles.size(); ++v) {
      const VehicleRecord& r = rec.vehicles[v];
      out << rec.step << ',' << num(rec.time) << ',' << v;
      for (const Eigen::Vector3d* vec : {&r.position, &r.velocity, &r.input, &r.reference}) {
        for (int k = 0; k < 3; ++k) out << ',' << num((*vec)(k));
      }
      out << ',' << num(r.formation_error) << ',' << num(rec.formation_rms) << ','
          << opt(rec.min_pairwise_distance) << ',' << opt(rec.min_obstacle_clearance) << ','
          << num(r.stage_cost) << ',' << r.diagnostics.iterations << ','
          << num(r.diagnostics.residual) << ',' << (r.diagnostics.converged ? 1 : 0) << '\n';
    }
  }
}

void write_trajectory_csv(const TrajectoryLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out", "cannot write '" + path.string() + "'");
  write_trajectory_csv(log, out);
}

TrajectoryLog read_trajectory_csv(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::map<int, std::size_t> step_index;
  int max_vehicle = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto f = split(line.substr(1));
      if (f.empty()) continue;
      std::string tag = f[0];
      tag.erase(0, tag.find_first_not_of(' '));
      if (tag == "separation" && f.size() == 2) {
        log.separation.d_min = parse_double(f[1], line_no);
      } else if (tag == "obstacle" && f.size() == 5) {
        CircleObstacle o;
        o.center = {parse_double(f[1], line_no), parse_double(f[2], line_no)};
        o.radius = parse_double(f[3], line_no);
        o.margin = parse_double(f[4], line_no);
        log.obstacles.push_back(o);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kTrajectoryCsvHeader) {
        throw ConfigError("csv", fmt::format("line {}: unexpected header", line_no));
      }
      header_seen = true;
      continue;
    }
    const auto f = split(line);
    if (static_cast<int>(f.size()) != kColumns) {
      throw ConfigError("csv", fmt::format("line {}: expected {} fields, got {}", line_no,
                                           kColumns, f.size()));
    }
    const int step = parse_int(f[0], line_no);
    const int vehicle = parse_int(f[2], line_no);
    auto it = step_index.find(step);
    if (it == step_index.end()) {
      StepRecord rec;
      rec.step = step;
      rec.time = parse_double(f[1], line_no);
      rec.formation_rms = parse_double(f[16], line_no);
      rec.min_pairwise_distance = parse_opt(f[17], line_no);
      rec.min_obstacle_clearance = parse_opt(f[18], line_no);
      log.steps.push_back(std::move(rec));
      it = step_index.emplace(step, log.steps.size() - 1).first;
    }
    StepRecord& rec = log.steps[it->second];
    if (vehicle != static_cast<int>(rec.vehicles.size())) {
      throw ConfigError("csv", fmt::format("line {}: vehicle rows out of order", line_no));
    }
    VehicleRecord r;
    r.position = vec3(f, 3, line_no);
    r.velocity = vec3(f, 6, line_no);
    r.input = vec3(f, 9, line_no);
    r.reference = vec3(f, 12, line_no);
    r.formation_error = parse_double(f[15], line_no);
    r.stage_cost = parse_double(f[19], line_no);
    r.diagnostics.iterations = parse_int(f[20], line_no);
    r.diagnostics.residual = parse_double(f[21], line_no);
    r.diagnostics.converged = f[22] == "1";
    rec.vehicles.push_back(r);
    max_vehicle = std::max(max_vehicle, vehicle);
  }
  if (log.steps.empty()) throw ConfigError("csv", "log has no data rows");
  log.vehicle_count = max_vehicle + 1;
  for (const auto& rec : log.steps) {
    if (static_cast<int>(rec.vehicles.size()) != log.vehicle_count) {
      throw ConfigError("csv", fmt::format("step {} has {} vehicles, expected {}", rec.step,
                                           rec.vehicles.size(), log.vehicle_count));
    }
  }
  return log;
}

TrajectoryLog read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("csv", "cannot read '" + path.string() + "'");
  return read_trajectory_csv(in);
}

std::string metrics_json(const Metrics& m) {
  auto opt_json = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["samples"] = m.samples;
  j["formation_error_rms"] = m.formation_error_rms;
  j["formation_error_rms_final_quarter"] = m.formation_error_rms_final_quarter;
  j["max_formation_error"] = m.max_formation_error;
  j["min_separation"] = opt_json(m.min_separation);
  j["min_obstacle_clearance"] = opt_json(m.min_obstacle_clearance);
  j["violation_count"] = m.violation_count;
  j["mean_solver_iterations"] = m.mean_solver_iterations;
  j["nonconverged_solves"] = m.nonconverged_solves;
  j["total_cost"] = m.total_cost;
  return j.dump(2) + "\n";
}

}  // namespace formpc
