#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dircoord/so3.hpp"

namespace dircoord {

// One row per prediction step: accelerometer sample applied over the
// interval to the next row, plus any measurements taken at time t.
struct ReplayRow {
  double t = 0.0;
  Vec3 accel = Vec3::Zero();
  std::optional<double> range;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<Vec3> r_true;
  std::optional<Vec3> v_true;

  bool operator==(const ReplayRow&) const = default;
};

struct ReplayLog {
  std::vector<ReplayRow> rows;
};

inline constexpr const char* kReplayHeader = "t,ax,ay,az,range,alpha,epsilon,rx,ry,rz,vx,vy,vz";

// Throws ParseError naming the 1-based line, NonMonotoneTime if t does not
// strictly increase.
ReplayLog parse_replay_log(const std::string& text);
ReplayLog read_replay_log(const std::filesystem::path& path);

std::string format_replay_log(const ReplayLog& log);

}  // namespace dircoord
