#pragma once

#include "crowdnav/errors.hpp"
#include "crowdnav/sim/observation.hpp"
#include "crowdnav/sim/types.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crowdnav::sim {

/// One agent at one timestep. agent_id 0 is the robot, humans are 1..n.
struct TrajectoryRow {
  int t = 0;
  int agent_id = 0;
  double px = 0.0, py = 0.0, vx = 0.0, vy = 0.0;
  double radius = 0.0;
  bool visible = true;

  bool operator==(const TrajectoryRow&) const = default;
};

inline constexpr std::array<std::string_view, 8> kTrajectoryColumns = {"t",  "agent_id", "px",     "py",
                                                                       "vx", "vy",       "radius", "visible_flag"};

class CsvParseError : public std::runtime_error {
 public:
  CsvParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Rows for the robot and every human at world.t.
inline std::vector<TrajectoryRow> snapshot_rows(const WorldState& world, const std::vector<bool>& visible) {
  std::vector<TrajectoryRow> rows;
  const RobotState& r = world.robot;
  rows.push_back({world.t, 0, r.px, r.py, r.vx, r.vy, r.rho, true});
  for (std::size_t i = 0; i < world.humans.size(); ++i) {
    const HumanState& h = world.humans[i];
    const bool vis = i < visible.size() ? static_cast<bool>(visible[i]) : true;
    rows.push_back({world.t, static_cast<int>(i) + 1, h.px, h.py, h.vx, h.vy, h.radius, vis});
  }
  return rows;
}

namespace csv_detail {

inline void put_double(std::ostream& os, double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  os.write(buf.data(), end - buf.data());
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& s, int line, std::string_view column) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw CsvParseError(line, "bad value '" + s + "' in column " + std::string(column));
  return value;
}

}  // namespace csv_detail

inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows) {
  for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) os << (c ? "," : "") << kTrajectoryColumns[c];
  os << '\n';
  for (const TrajectoryRow& r : rows) {
    os << r.t << ',' << r.agent_id << ',';
    csv_detail::put_double(os, r.px);
    os << ',';
    csv_detail::put_double(os, r.py);
    os << ',';
    csv_detail::put_double(os, r.vx);
    os << ',';
    csv_detail::put_double(os, r.vy);
    os << ',';
    csv_detail::put_double(os, r.radius);
    os << ',' << (r.visible ? 1 : 0) << '\n';
  }
}

/// Parses a trajectory CSV. Columns may appear in any order; a missing column
/// or malformed row raises CsvParseError naming the column or line.
inline std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvParseError(1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = csv_detail::split(line);
  std::array<int, kTrajectoryColumns.size()> index{};
  for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) {
    index[c] = -1;
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (header[h] == kTrajectoryColumns[c]) index[c] = static_cast<int>(h);
    }
    if (index[c] < 0) throw CsvParseError(1, "missing column '" + std::string(kTrajectoryColumns[c]) + "'");
  }

  std::vector<TrajectoryRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = csv_detail::split(line);
    if (cells.size() != header.size())
      throw CsvParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(cells.size()));
    auto cell = [&](std::size_t c) -> const std::string& { return cells[static_cast<std::size_t>(index[c])]; };
    TrajectoryRow r;
    r.t = csv_detail::parse_number<int>(cell(0), line_no, kTrajectoryColumns[0]);
    r.agent_id = csv_detail::parse_number<int>(cell(1), line_no, kTrajectoryColumns[1]);
    r.px = csv_detail::parse_number<double>(cell(2), line_no, kTrajectoryColumns[2]);
    r.py = csv_detail::parse_number<double>(cell(3), line_no, kTrajectoryColumns[3]);
    r.vx = csv_detail::parse_number<double>(cell(4), line_no, kTrajectoryColumns[4]);
    r.vy = csv_detail::parse_number<double>(cell(5), line_no, kTrajectoryColumns[5]);
    r.radius = csv_detail::parse_number<double>(cell(6), line_no, kTrajectoryColumns[6]);
    const int vis = csv_detail::parse_number<int>(cell(7), line_no, kTrajectoryColumns[7]);
    if (vis != 0 && vis != 1) throw CsvParseError(line_no, "visible_flag must be 0 or 1");
    r.visible = vis == 1;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace crowdnav::sim
