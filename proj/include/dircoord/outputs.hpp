#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dircoord/harness.hpp"

namespace dircoord {

// Each overload writes CSV tables, whitespace-separated .dat plot series and a
// manifest.txt (config hash, seed, file list) under `dir`, creating it if
// needed. Output bytes depend only on the result. Throws IoError.
// Returns the written paths relative to `dir`.
std::vector<std::string> emit_outputs(const DynamicStudyResult& result, const std::filesystem::path& dir);
std::vector<std::string> emit_outputs(const SingleCorrectionResult& result, const std::filesystem::path& dir);
std::vector<std::string> emit_outputs(const ReplayResult& result, const std::filesystem::path& dir);

// Per-trial table: one row per timestep with truth and both filters' columns.
std::string format_trial_csv(const TrialRecord& record);
std::string format_aggregate_csv(const AggregateSeries& dckf, const AggregateSeries& ekf);

// Equal-width histogram over [lo, hi]; rows "left right count".
std::string format_histogram(const std::vector<double>& values, std::size_t bins);

}  // namespace dircoord
