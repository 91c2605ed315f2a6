// Command-line front end for the Monte Carlo studies and log replay.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dircoord/config.hpp"
#include "dircoord/error.hpp"
#include "dircoord/harness.hpp"
#include "dircoord/outputs.hpp"
#include "dircoord/replay_log.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Scenario config file (defaults built in when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "Master seed override");
  cmd->add_option("--trials", args.trials, "Trial count override");
}

dircoord::ScenarioConfig resolve(const CommonArgs& args) {
  dircoord::ScenarioConfig config = args.config.empty() ? dircoord::ScenarioConfig{} : dircoord::load_config(args.config);
  if (args.seed) config.run.seed = *args.seed;
  if (args.trials) config.run.trials = *args.trials;
  config.validate();
  return config;
}

void print_files(const std::filesystem::path& dir, const std::vector<std::string>& files) {
  std::cout << "wrote " << files.size() << " files to " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directional-coordinate localization studies"};
  app.require_subcommand(1);

  CommonArgs single_args, dynamic_args, replay_args;
  auto* single = app.add_subcommand("single-correction", "Static single range-correction Monte Carlo study");
  add_common(single, single_args);
  auto* dynamic = app.add_subcommand("dynamic", "Dynamic DCKF vs EKF Monte Carlo study");
  add_common(dynamic, dynamic_args);
  auto* replay = app.add_subcommand("replay", "Run both filters over a recorded log");
  add_common(replay, replay_args);
  std::string log_path;
  std::optional<std::size_t> replay_trial;
  bool synthesize_ae = false;
  replay->add_option("--log", log_path, "Replay log CSV")->required()->check(CLI::ExistingFile);
  replay->add_option("--trial", replay_trial, "Trial index whose prior stream is reused when the log has truth");
  replay->add_flag("--synthesize-ae", synthesize_ae, "Simulate azimuth/elevation from truth where the log has none");

  CLI11_PARSE(app, argc, argv);

  try {
    if (single->parsed()) {
      const auto config = resolve(single_args);
      const auto result = dircoord::run_single_correction_study(config);
      print_files(single_args.out, dircoord::emit_outputs(result, single_args.out));
    } else if (dynamic->parsed()) {
      const auto config = resolve(dynamic_args);
      const auto result = dircoord::run_dynamic_study(config);
      std::cout << "error reduction: " << result.error_reduction_percent << " %\n";
      print_files(dynamic_args.out, dircoord::emit_outputs(result, dynamic_args.out));
    } else if (replay->parsed()) {
      auto config = resolve(replay_args);
      if (replay_trial) config.run.replay_trial = *replay_trial;
      if (synthesize_ae) config.run.synthesize_ae = true;
      const auto log = dircoord::read_replay_log(log_path);
      const auto result = dircoord::run_replay(log, config);
      print_files(replay_args.out, dircoord::emit_outputs(result, replay_args.out));
    }
  } catch (const dircoord::Error& e) {
    std::cerr << "error [" << dircoord::to_string(e.kind()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
