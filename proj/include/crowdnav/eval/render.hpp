#pragma once

#include "crowdnav/eval/evaluate.hpp"
#include "crowdnav/math.hpp"
#include "crowdnav/sim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdnav::eval {

/// Everything drawn in a trajectory figure.
struct TrajectoryScene {
  std::vector<sim::TrajectoryRow> rows;
  std::map<int, Vec2> starts;       // agent_id -> start position
  std::optional<Vec2> robot_goal;
  double robot_heading = 0.0;       // at the final pose
  double fov_deg = 360.0;
};

inline TrajectoryScene scene_from_record(const EpisodeRecord& rec) {
  TrajectoryScene s;
  s.rows = rec.rows;
  s.starts[0] = rec.initial.robot.position();
  for (std::size_t i = 0; i < rec.initial.humans.size(); ++i)
    s.starts[static_cast<int>(i) + 1] = rec.initial.humans[i].position();
  s.robot_goal = rec.initial.robot.goal();
  s.robot_heading = rec.final_heading;
  s.fov_deg = rec.initial.config.fov_deg;
  return s;
}

/// For a bare CSV: starts are each agent's first row, the heading is the
/// direction of the robot's last nonzero velocity.
inline TrajectoryScene scene_from_rows(std::vector<sim::TrajectoryRow> rows, double fov_deg = 360.0,
                                       std::optional<Vec2> robot_goal = std::nullopt) {
  TrajectoryScene s;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  for (const auto& r : rows) {
    s.starts.emplace(r.agent_id, Vec2(r.px, r.py));
    if (r.agent_id == 0 && std::hypot(r.vx, r.vy) > 1e-9) s.robot_heading = std::atan2(r.vy, r.vx);
  }
  s.rows = std::move(rows);
  s.fov_deg = fov_deg;
  s.robot_goal = robot_goal;
  return s;
}

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

inline std::string star_points(double cx, double cy, double r_out, double r_in) {
  std::string out;
  for (int k = 0; k < 10; ++k) {
    const double a = -std::numbers::pi / 2 + k * std::numbers::pi / 5;
    const double r = k % 2 == 0 ? r_out : r_in;
    if (k) out += ' ';
    out += num(cx + r * std::cos(a)) + "," + num(cy + r * std::sin(a));
  }
  return out;
}

}  // namespace svg_detail

inline void write_svg(std::ostream& os, const TrajectoryScene& scene) {
  using svg_detail::num;
  constexpr double kScale = 40.0;  // px per metre
  constexpr double kMargin = 1.0;  // metres
  constexpr double kWedge = 2.0;   // FoV wedge radius, metres

  std::map<int, std::vector<const sim::TrajectoryRow*>> by_agent;
  for (const auto& r : scene.rows) by_agent[r.agent_id].push_back(&r);

  double xmin = -6, xmax = 6, ymin = -6, ymax = 6;
  auto grow = [&](double x, double y, double pad) {
    xmin = std::min(xmin, x - pad);
    xmax = std::max(xmax, x + pad);
    ymin = std::min(ymin, y - pad);
    ymax = std::max(ymax, y + pad);
  };
  for (const auto& r : scene.rows) grow(r.px, r.py, r.radius);
  for (const auto& [id, p] : scene.starts) grow(p.x(), p.y(), 0.0);
  if (scene.robot_goal) grow(scene.robot_goal->x(), scene.robot_goal->y(), 0.3);
  xmin -= kMargin, ymin -= kMargin, xmax += kMargin, ymax += kMargin;
  const double w = (xmax - xmin) * kScale, h = (ymax - ymin) * kScale;
  auto X = [&](double x) { return (x - xmin) * kScale; };
  auto Y = [&](double y) { return (ymax - y) * kScale; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
  os << "<style>.human{stroke:#3060c0;fill:none;stroke-width:1.5}.robot{stroke:#c09000;fill:none;stroke-width:2.5}"
        ".start{font:bold 11px sans-serif}.fov{fill:#f0d060;fill-opacity:0.25;stroke:#806000;stroke-dasharray:4 3}"
        "</style>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& [id, pts] : by_agent) {
    os << "<path class=\"" << (id == 0 ? "robot" : "human") << "\" data-agent=\"" << id << "\" d=\"";
    bool first = true;
    if (auto it = scene.starts.find(id); it != scene.starts.end()) {
      os << 'M' << num(X(it->second.x())) << ',' << num(Y(it->second.y()));
      first = false;
    }
    for (const auto* r : pts) {
      os << (first ? "M" : " L") << num(X(r->px)) << ',' << num(Y(r->py));
      first = false;
    }
    os << "\"/>\n";
  }

  for (const auto& [id, p] : scene.starts) {
    os << "<text class=\"start\" x=\"" << num(X(p.x()) - 4) << "\" y=\"" << num(Y(p.y()) + 4) << "\">S</text>\n";
  }

  if (scene.robot_goal) {
    os << "<polygon class=\"goal\" fill=\"#d02020\" points=\""
       << svg_detail::star_points(X(scene.robot_goal->x()), Y(scene.robot_goal->y()), 0.35 * kScale, 0.15 * kScale)
       << "\"/>\n";
  }

  // Final poses: humans as circles, robot as a filled disk with its FoV.
  for (const auto& [id, pts] : by_agent) {
    if (id == 0 || pts.empty()) continue;
    const auto* r = pts.back();
    os << "<circle class=\"human-final\" cx=\"" << num(X(r->px)) << "\" cy=\"" << num(Y(r->py)) << "\" r=\""
       << num(r->radius * kScale) << "\" fill=\"" << (r->visible ? "#3060c0" : "#d03030")
       << "\" fill-opacity=\"0.4\"/>\n";
  }
  Vec2 robot = scene.starts.count(0) ? scene.starts.at(0) : Vec2::Zero();
  double robot_r = 0.3;
  if (auto it = by_agent.find(0); it != by_agent.end() && !it->second.empty()) {
    robot = {it->second.back()->px, it->second.back()->py};
    robot_r = it->second.back()->radius;
  }
  if (scene.fov_deg < 360.0) {
    const double half = 0.5 * deg_to_rad(scene.fov_deg);
    const int segments = std::max(2, static_cast<int>(std::ceil(scene.fov_deg / 2.0)));
    os << "<polygon class=\"fov\" data-fov-deg=\"" << num(scene.fov_deg) << "\" points=\"" << num(X(robot.x())) << ','
       << num(Y(robot.y()));
    for (int k = 0; k <= segments; ++k) {
      const double a = scene.robot_heading - half + 2.0 * half * k / segments;
      os << ' ' << num(X(robot.x() + kWedge * std::cos(a))) << ',' << num(Y(robot.y() + kWedge * std::sin(a)));
    }
    os << "\"/>\n";
  } else {
    os << "<circle class=\"fov\" data-fov-deg=\"360.000\" cx=\"" << num(X(robot.x())) << "\" cy=\""
       << num(Y(robot.y())) << "\" r=\"" << num(kWedge * kScale) << "\"/>\n";
  }
  os << "<circle class=\"robot-disk\" cx=\"" << num(X(robot.x())) << "\" cy=\"" << num(Y(robot.y())) << "\" r=\""
     << num(robot_r * kScale) << "\" fill=\"#f0c000\" stroke=\"black\"/>\n";
  os << "</svg>\n";
}

/// Writes <stem>.csv and <stem>.svg.
inline void export_trajectory(const EpisodeRecord& rec, const std::filesystem::path& stem) {
  if (rec.rows.empty()) throw ContractViolation("episode record has no trajectory (evaluate with recording on)");
  const std::filesystem::path csv = stem.string() + ".csv", svg = stem.string() + ".svg";
  std::ofstream c(csv, std::ios::binary | std::ios::trunc);
  if (!c) throw std::runtime_error("cannot write " + csv.string());
  sim::write_trajectory_csv(c, rec.rows);
  std::ofstream s(svg, std::ios::binary | std::ios::trunc);
  if (!s) throw std::runtime_error("cannot write " + svg.string());
  write_svg(s, scene_from_record(rec));
  if (!c || !s) throw std::runtime_error("write failed for " + stem.string());
}

}  // namespace crowdnav::eval
