#include "dircoord/replay_log.hpp"

#include <fstream>
#include <sstream>

#include "dircoord/csv.hpp"
#include "dircoord/error.hpp"

namespace dircoord {

namespace {

constexpr std::size_t kColumns = 13;

std::optional<double> optional_field(const std::string& f, std::size_t lineno, const char* name) {
  if (f.empty()) return std::nullopt;
  double x = 0.0;
  if (!csv::parse(f, x)) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": bad value '" + f + "' in column " + name);
  }
  return x;
}

double required_field(const std::string& f, std::size_t lineno, const char* name) {
  const auto x = optional_field(f, lineno, name);
  if (!x) throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": missing " + name);
  return *x;
}

std::optional<Vec3> optional_vec(const std::vector<std::string>& f, std::size_t first, std::size_t lineno,
                                 const char* name) {
  const bool any = !f[first].empty() || !f[first + 1].empty() || !f[first + 2].empty();
  if (!any) return std::nullopt;
  return Vec3(required_field(f[first], lineno, name), required_field(f[first + 1], lineno, name),
              required_field(f[first + 2], lineno, name));
}

std::string opt_text(const std::optional<double>& x) { return x ? csv::format(*x) : std::string(); }

}  // namespace

ReplayLog parse_replay_log(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  ReplayLog log;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != kReplayHeader) {
        throw Error(ErrorKind::ParseError, "line 1: expected header '" + std::string(kReplayHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> f = csv::split(line);
    if (f.size() != kColumns) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected 13 columns, got " +
                                             std::to_string(f.size()));
    }
    ReplayRow row;
    row.t = required_field(f[0], lineno, "t");
    row.accel = Vec3(required_field(f[1], lineno, "ax"), required_field(f[2], lineno, "ay"),
                     required_field(f[3], lineno, "az"));
    row.range = optional_field(f[4], lineno, "range");
    row.alpha = optional_field(f[5], lineno, "alpha");
    row.epsilon = optional_field(f[6], lineno, "epsilon");
    if (row.alpha.has_value() != row.epsilon.has_value()) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": alpha and epsilon must come together");
    }
    row.r_true = optional_vec(f, 7, lineno, "r");
    row.v_true = optional_vec(f, 10, lineno, "v");
    if (!log.rows.empty() && !(row.t > log.rows.back().t)) {
      throw Error(ErrorKind::NonMonotoneTime, "line " + std::to_string(lineno) + ": time does not increase");
    }
    log.rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorKind::ParseError, "line 1: empty log");
  return log;
}

ReplayLog read_replay_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open log " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_replay_log(ss.str());
}

std::string format_replay_log(const ReplayLog& log) {
  std::string out = std::string(kReplayHeader) + "\n";
  for (const ReplayRow& row : log.rows) {
    std::vector<std::string> f;
    f.reserve(kColumns);
    f.push_back(csv::format(row.t));
    for (int i = 0; i < 3; ++i) f.push_back(csv::format(row.accel(i)));
    f.push_back(opt_text(row.range));
    f.push_back(opt_text(row.alpha));
    f.push_back(opt_text(row.epsilon));
    for (int i = 0; i < 3; ++i) f.push_back(row.r_true ? csv::format((*row.r_true)(i)) : std::string());
    for (int i = 0; i < 3; ++i) f.push_back(row.v_true ? csv::format((*row.v_true)(i)) : std::string());
    out += csv::join(f);
    out += '\n';
  }
  return out;
}

}  // namespace dircoord
