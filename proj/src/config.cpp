#include "dircoord/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dircoord/csv.hpp"
#include "dircoord/error.hpp"

namespace dircoord {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v, const std::string& where) {
  double x = 0.0;
  if (!csv::parse(v, x)) throw Error(ErrorKind::ConfigError, where + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_uint(const std::string& v, const std::string& where) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::ConfigError, where + ": expected a non-negative integer, got '" + v + "'");
  }
  return std::stoull(v);
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::ConfigError, where + ": expected true/false, got '" + v + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"noise.range_std", [](auto& c, auto& v, auto& w) { c.noise.range_std = to_double(v, w); }},
      {"noise.ae_std", [](auto& c, auto& v, auto& w) { c.noise.ae_std = to_double(v, w); }},
      {"noise.accel_std", [](auto& c, auto& v, auto& w) { c.noise.accel_std = to_double(v, w); }},
      {"noise.init_pos_std", [](auto& c, auto& v, auto& w) { c.noise.init_pos_std = to_double(v, w); }},
      {"noise.init_vel_std", [](auto& c, auto& v, auto& w) { c.noise.init_vel_std = to_double(v, w); }},
      {"noise.meas_frequency", [](auto& c, auto& v, auto& w) { c.noise.meas_frequency = to_double(v, w); }},
      {"run.seed", [](auto& c, auto& v, auto& w) { c.run.seed = to_uint(v, w); }},
      {"run.trials", [](auto& c, auto& v, auto& w) { c.run.trials = to_uint(v, w); }},
      {"run.duration", [](auto& c, auto& v, auto& w) { c.run.duration = to_double(v, w); }},
      {"run.prediction_rate", [](auto& c, auto& v, auto& w) { c.run.prediction_rate = to_double(v, w); }},
      {"run.run_dckf", [](auto& c, auto& v, auto& w) { c.run.run_dckf = to_bool(v, w); }},
      {"run.run_ekf", [](auto& c, auto& v, auto& w) { c.run.run_ekf = to_bool(v, w); }},
      {"run.use_range", [](auto& c, auto& v, auto& w) { c.run.use_range = to_bool(v, w); }},
      {"run.use_ae", [](auto& c, auto& v, auto& w) { c.run.use_ae = to_bool(v, w); }},
      {"run.synthesize_ae", [](auto& c, auto& v, auto& w) { c.run.synthesize_ae = to_bool(v, w); }},
      {"run.replay_trial", [](auto& c, auto& v, auto& w) { c.run.replay_trial = to_uint(v, w); }},
      {"run.dckf_q_scale", [](auto& c, auto& v, auto& w) { c.run.dckf_q_scale = to_double(v, w); }},
      {"run.ekf_q_scale", [](auto& c, auto& v, auto& w) { c.run.ekf_q_scale = to_double(v, w); }},
      {"run.sigma_scheme",
       [](auto& c, auto& v, auto& w) {
         if (v == "cubature") {
           c.run.sigma_scheme = SigmaScheme::SphericalCubature;
         } else if (v == "unscented") {
           c.run.sigma_scheme = SigmaScheme::Unscented;
         } else {
           throw Error(ErrorKind::ConfigError, w + ": sigma_scheme must be cubature or unscented");
         }
       }},
      {"run.ae_conversion",
       [](auto& c, auto& v, auto& w) {
         if (v == "linearized") {
           c.run.ae_conversion = AeConversion::Linearized;
         } else if (v == "debiased") {
           c.run.ae_conversion = AeConversion::Debiased;
         } else {
           throw Error(ErrorKind::ConfigError, w + ": ae_conversion must be linearized or debiased");
         }
       }},
      {"run.pf_particles", [](auto& c, auto& v, auto& w) { c.run.pf_particles = to_uint(v, w); }},
      {"run.knn_k", [](auto& c, auto& v, auto& w) { c.run.knn_k = static_cast<int>(to_uint(v, w)); }},
      {"run.kl_samples", [](auto& c, auto& v, auto& w) { c.run.kl_samples = to_uint(v, w); }},
      {"run.prior_range_min", [](auto& c, auto& v, auto& w) { c.run.prior_range_min = to_double(v, w); }},
      {"run.prior_range_max", [](auto& c, auto& v, auto& w) { c.run.prior_range_max = to_double(v, w); }},
      {"run.prior_sigma_min", [](auto& c, auto& v, auto& w) { c.run.prior_sigma_min = to_double(v, w); }},
      {"run.prior_sigma_max", [](auto& c, auto& v, auto& w) { c.run.prior_sigma_max = to_double(v, w); }},
      {"run.threads", [](auto& c, auto& v, auto& w) { c.run.threads = static_cast<int>(to_uint(v, w)); }},
  };
  return table;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::ConfigError, what);
  };
  require(noise.range_std >= 0.0 && noise.ae_std >= 0.0 && noise.accel_std >= 0.0, "noise std devs must be >= 0");
  require(noise.init_pos_std >= 0.0 && noise.init_vel_std >= 0.0, "initial std devs must be >= 0");
  require(noise.meas_frequency > 0.0 && run.prediction_rate > 0.0, "frequencies must be > 0");
  require(run.duration > 0.0, "duration must be > 0");
  require(run.trials >= 1, "trials must be >= 1");
  require(run.pf_particles >= 1, "pf_particles must be >= 1");
  require(run.knn_k >= 1 && run.kl_samples > static_cast<std::size_t>(run.knn_k), "kl_samples must exceed knn_k");
  require(run.dckf_q_scale >= 0.0 && run.ekf_q_scale >= 0.0, "q scales must be >= 0");
  require(run.prior_range_min > 0.0 && run.prior_range_max >= run.prior_range_min, "invalid prior range bounds");
  require(run.prior_sigma_min > 0.0 && run.prior_sigma_max >= run.prior_sigma_min, "invalid prior sigma bounds");
  const double ratio = run.prediction_rate / noise.meas_frequency;
  require(ratio >= 1.0 && std::abs(ratio - std::round(ratio)) < 1e-9,
          "prediction_rate must be an integer multiple of meas_frequency");
}

std::size_t ScenarioConfig::steps_per_measurement() const {
  return static_cast<std::size_t>(std::llround(run.prediction_rate / noise.meas_frequency));
}

std::string ScenarioConfig::serialize() const {
  std::ostringstream os;
  os << "[noise]\n"
     << "range_std = " << csv::format(noise.range_std) << "\n"
     << "ae_std = " << csv::format(noise.ae_std) << "\n"
     << "accel_std = " << csv::format(noise.accel_std) << "\n"
     << "init_pos_std = " << csv::format(noise.init_pos_std) << "\n"
     << "init_vel_std = " << csv::format(noise.init_vel_std) << "\n"
     << "meas_frequency = " << csv::format(noise.meas_frequency) << "\n"
     << "\n[run]\n"
     << "seed = " << run.seed << "\n"
     << "trials = " << run.trials << "\n"
     << "duration = " << csv::format(run.duration) << "\n"
     << "prediction_rate = " << csv::format(run.prediction_rate) << "\n"
     << "run_dckf = " << bool_text(run.run_dckf) << "\n"
     << "run_ekf = " << bool_text(run.run_ekf) << "\n"
     << "use_range = " << bool_text(run.use_range) << "\n"
     << "use_ae = " << bool_text(run.use_ae) << "\n"
     << "synthesize_ae = " << bool_text(run.synthesize_ae) << "\n"
     << "replay_trial = " << run.replay_trial << "\n"
     << "dckf_q_scale = " << csv::format(run.dckf_q_scale) << "\n"
     << "ekf_q_scale = " << csv::format(run.ekf_q_scale) << "\n"
     << "sigma_scheme = " << (run.sigma_scheme == SigmaScheme::Unscented ? "unscented" : "cubature") << "\n"
     << "ae_conversion = " << (run.ae_conversion == AeConversion::Debiased ? "debiased" : "linearized") << "\n"
     << "pf_particles = " << run.pf_particles << "\n"
     << "knn_k = " << run.knn_k << "\n"
     << "kl_samples = " << run.kl_samples << "\n"
     << "prior_range_min = " << csv::format(run.prior_range_min) << "\n"
     << "prior_range_max = " << csv::format(run.prior_range_max) << "\n"
     << "prior_sigma_min = " << csv::format(run.prior_sigma_min) << "\n"
     << "prior_sigma_max = " << csv::format(run.prior_sigma_max) << "\n"
     << "threads = " << run.threads << "\n";
  return os.str();
}

std::uint64_t ScenarioConfig::hash() const {
  // FNV-1a over the canonical text, stable across platforms.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    const auto hash_pos = line.find('#');
    const std::string body = trim(hash_pos == std::string::npos ? line : line.substr(0, hash_pos));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw Error(ErrorKind::ConfigError, where + ": malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (section != "noise" && section != "run") {
        throw Error(ErrorKind::ConfigError, where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, where + ": expected key = value");
    if (section.empty()) throw Error(ErrorKind::ConfigError, where + ": key outside of a section");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = setters().find(section + "." + key);
    if (it == setters().end()) throw Error(ErrorKind::ConfigError, where + ": unknown key '" + key + "'");
    it->second(config, value, where);
  }
  config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

int resolve_threads(const ScenarioConfig& config) {
  if (const char* env = std::getenv("DIRCOORD_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 0) throw Error(ErrorKind::ConfigError, "DIRCOORD_THREADS must be a non-negative integer");
    return static_cast<int>(n);
  }
  return config.run.threads;
}

}  // namespace dircoord
