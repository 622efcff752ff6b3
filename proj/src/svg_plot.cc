#include "formpc/svg_plot.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace formpc {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kPad = 50.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

const char* color(std::size_t i) { return kPalette[i % kPalette.size()]; }

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-9) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  double span() const { return hi - lo; }
};

// Maps data coordinates to a pixel box; y grows upward in data space.
struct Frame {
  double x0, y0, w, h;
  Range xr, yr;

  double px(double x) const { return x0 + (x - xr.lo) / xr.span() * w; }
  double py(double y) const { return y0 + h - (y - yr.lo) / yr.span() * h; }
};

std::string header(double width, double height) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      width, height, width, height);
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s = fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
      "stroke=\"black\" stroke-width=\"1\"/>\n",
      f.x0, f.y0, f.w, f.h);
  s += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
      f.x0 + f.w / 2, f.y0 + f.h + 35, xlabel);
  s += fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 {:.2f} {:.2f})\">{}</text>\n",
      f.x0 - 35, f.y0 + f.h / 2, f.x0 - 35, f.y0 + f.h / 2, ylabel);
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.xr.lo + f.xr.span() * i / 4.0;
    const double yv = f.yr.lo + f.yr.span() * i / 4.0;
    s += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"middle\">{:.4g}</text>\n",
        f.px(xv), f.y0 + f.h + 14, xv);
    s += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\" text-anchor=\"end\">{:.4g}</text>\n",
        f.x0 - 4, f.py(yv) + 3, yv);
  }
  return s;
}

std::string polyline(const Frame& f, const std::vector<double>& xs, const std::vector<double>& ys,
                     const char* stroke, const char* dash = nullptr) {
  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
    if (!pts.empty()) pts += ' ';
    pts += fmt::format("{:.2f},{:.2f}", f.px(xs[i]), f.py(ys[i]));
  }
  std::string extra = dash ? fmt::format(" stroke-dasharray=\"{}\"", dash) : std::string();
  return fmt::format(
      "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n", pts,
      stroke, extra);
}

std::string legend(double x, double y, std::size_t count) {
  std::string s;
  for (std::size_t v = 0; v < count; ++v) {
    const double yy = y + 14.0 * static_cast<double>(v);
    s += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"2\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"10\">vehicle {}</text>\n",
        x, yy, x + 16, yy, color(v), x + 20, yy + 3, v);
  }
  return s;
}

}  // namespace

std::string xy_trajectories_svg(const TrajectoryLog& log) {
  Range xr, yr;
  for (const auto& rec : log.steps) {
    for (const auto& v : rec.vehicles) {
      xr.add(v.position.x());
      yr.add(v.position.y());
    }
  }
  for (const auto& o : log.obstacles) {
    const double r = o.effective_radius();
    xr.add(o.center.x() - r);
    xr.add(o.center.x() + r);
    yr.add(o.center.y() - r);
    yr.add(o.center.y() + r);
  }
  xr.finish();
  yr.finish();

  // Equal aspect: widen the narrower axis about its midpoint.
  const double w = kWidth - 2 * kPad;
  const double h = kHeight - 2 * kPad;
  const double scale = std::max(xr.span() / w, yr.span() / h) * 1.05;
  const double xm = 0.5 * (xr.lo + xr.hi);
  const double ym = 0.5 * (yr.lo + yr.hi);
  xr.lo = xm - 0.5 * scale * w;
  xr.hi = xm + 0.5 * scale * w;
  yr.lo = ym - 0.5 * scale * h;
  yr.hi = ym + 0.5 * scale * h;
  const Frame f{kPad, kPad, w, h, xr, yr};

  std::string s = header(kWidth, kHeight);
  s += axes(f, "x [m]", "y [m]");
  for (const auto& o : log.obstacles) {
    s += fmt::format(
        "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"#bbbbbb\" stroke=\"none\"/>\n",
        f.px(o.center.x()), f.py(o.center.y()), o.radius / scale);
    if (o.margin > 0.0) {
      s += fmt::format(
          "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"none\" stroke=\"#555555\" "
          "stroke-dasharray=\"4 3\"/>\n",
          f.px(o.center.x()), f.py(o.center.y()), o.effective_radius() / scale);
    }
  }
  for (int v = 0; v < log.vehicle_count; ++v) {
    std::vector<double> xs, ys, rx, ry;
    for (const auto& rec : log.steps) {
      const auto& r = rec.vehicles[static_cast<std::size_t>(v)];
      xs.push_back(r.position.x());
      ys.push_back(r.position.y());
      rx.push_back(r.reference.x());
      ry.push_back(r.reference.y());
    }
    s += polyline(f, rx, ry, color(static_cast<std::size_t>(v)), "2 3");
    s += polyline(f, xs, ys, color(static_cast<std::size_t>(v)));
  }
  s += legend(kPad + 8, kPad + 12, static_cast<std::size_t>(log.vehicle_count));
  s += "</svg>\n";
  return s;
}

std::string formation_error_svg(const TrajectoryLog& log) {
  const bool pairs = log.vehicle_count > 1;
  const double panel_h = pairs ? 160.0 : kHeight - 2 * kPad;
  const double w = kWidth - 2 * kPad;

  std::vector<double> t, rms, dmin;
  Range tr, er, dr;
  for (const auto& rec : log.steps) {
    t.push_back(rec.time);
    rms.push_back(rec.formation_rms);
    dmin.push_back(rec.min_pairwise_distance.value_or(std::numeric_limits<double>::quiet_NaN()));
    tr.add(rec.time);
    er.add(rec.formation_rms);
    if (rec.min_pairwise_distance) dr.add(*rec.min_pairwise_distance);
  }
  er.add(0.0);
  tr.finish();
  er.finish();

  std::string s = header(kWidth, kHeight);
  const Frame top{kPad, kPad, w, panel_h, tr, er};
  s += axes(top, "time [s]", "formation RMS [m]");
  s += polyline(top, t, rms, color(0));

  if (pairs) {
    dr.add(log.separation.d_min);
    dr.add(0.0);
    dr.finish();
    const Frame bottom{kPad, kPad + panel_h + 70.0, w, panel_h, tr, dr};
    s += axes(bottom, "time [s]", "min distance [m]");
    s += polyline(bottom, t, dmin, color(1));
    const double yd = bottom.py(log.separation.d_min);
    s += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\" "
        "stroke-dasharray=\"5 4\"/>\n",
        bottom.x0, yd, bottom.x0 + bottom.w, yd);
  }
  s += "</svg>\n";
  return s;
}

}  // namespace formpc
