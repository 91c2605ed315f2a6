#include "dircoord/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dircoord/csv.hpp"
#include "dircoord/error.hpp"

namespace dircoord {

namespace fs = std::filesystem;

namespace {

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& rel, const std::string& content) {
    const fs::path path = dir_ / rel;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
    written_.push_back(rel);
  }

  std::vector<std::string> finish(const ScenarioConfig& config, const std::string& study) {
    std::ostringstream m;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config.hash()));
    m << "study = " << study << "\n";
    m << "config_hash = " << hash << "\n";
    m << "seed = " << config.run.seed << "\n";
    m << "trials = " << config.run.trials << "\n";
    for (const std::string& f : written_) m << "file = " << f << "\n";
    m << "\n# config\n" << config.serialize();
    write("manifest.txt", m.str());
    return written_;
  }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

std::string fmt(double x) { return csv::format(x); }

std::string line(const std::vector<std::string>& fields) { return csv::join(fields) + "\n"; }

std::string trial_name(std::size_t i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "trial_%04zu%s", i, suffix);
  return buf;
}

void append_filter_header(std::vector<std::string>& h, const std::string& p) {
  for (const char* c : {"rx", "ry", "rz", "vx", "vy", "vz"}) h.push_back(p + "_" + c);
  for (int i = 0; i < 6; ++i) h.push_back(p + "_err" + std::to_string(i));
  for (int i = 0; i < 6; ++i) h.push_back(p + "_var" + std::to_string(i));
  for (const char* c : {"nees", "mahalanobis", "err_norm", "pos_err", "vel_err"}) h.push_back(p + "_" + c);
}

void append_filter_row(std::vector<std::string>& row, const FilterSample& s) {
  for (int i = 0; i < 3; ++i) row.push_back(fmt(s.r_hat(i)));
  for (int i = 0; i < 3; ++i) row.push_back(fmt(s.v_hat(i)));
  for (int i = 0; i < 6; ++i) row.push_back(fmt(s.error_state(i)));
  for (int i = 0; i < 6; ++i) row.push_back(fmt(s.cov_diag(i)));
  for (double x : {s.metrics.nees, s.metrics.mahalanobis, s.metrics.err_norm, s.metrics.pos_err, s.metrics.vel_err}) {
    row.push_back(fmt(x));
  }
}

std::string key_values(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string out = line({"key", "value"});
  for (const auto& [k, v] : kv) out += line({k, v});
  return out;
}

// Error components and ±3σ envelopes of one trial, one block per filter.
std::string sigma_bounds(const TrialRecord& rec) {
  std::string out = "# t err0..err5 sigma3_0..sigma3_5 (dckf block, then ekf block)\n";
  for (const auto* s : {&rec.dckf, &rec.ekf}) {
    for (std::size_t k = 0; k < s->size(); ++k) {
      const FilterSample& f = (*s)[k];
      out += fmt(rec.t[k]);
      for (int i = 0; i < 6; ++i) out += " " + fmt(f.error_state(i));
      for (int i = 0; i < 6; ++i) out += " " + fmt(3.0 * std::sqrt(std::max(0.0, f.cov_diag(i))));
      out += "\n";
    }
    out += "\n\n";
  }
  return out;
}

std::string box_stats(const std::vector<double>& values) {
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  if (v.empty()) return "nan nan nan nan nan";
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return fmt(v.front()) + " " + fmt(q(0.25)) + " " + fmt(q(0.5)) + " " + fmt(q(0.75)) + " " + fmt(v.back());
}

std::string cloud_dat(const MatrixXd& m) {
  std::string out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    out += fmt(m(0, j)) + " " + fmt(m(1, j)) + " " + fmt(m(2, j)) + "\n";
  }
  return out;
}

}  // namespace

std::string format_trial_csv(const TrialRecord& rec) {
  std::vector<std::string> h{"t", "rx_true", "ry_true", "rz_true", "vx_true", "vy_true", "vz_true"};
  if (!rec.dckf.empty()) append_filter_header(h, "dckf");
  if (!rec.ekf.empty()) append_filter_header(h, "ekf");
  std::string out = line(h);
  for (std::size_t k = 0; k < rec.t.size(); ++k) {
    std::vector<std::string> row{fmt(rec.t[k])};
    for (int i = 0; i < 3; ++i) row.push_back(rec.has_truth ? fmt(rec.r_true[k](i)) : "");
    for (int i = 0; i < 3; ++i) row.push_back(rec.has_truth ? fmt(rec.v_true[k](i)) : "");
    if (!rec.dckf.empty()) append_filter_row(row, rec.dckf[k]);
    if (!rec.ekf.empty()) append_filter_row(row, rec.ekf[k]);
    out += line(row);
  }
  return out;
}

std::string format_aggregate_csv(const AggregateSeries& dckf, const AggregateSeries& ekf) {
  const AggregateSeries& ref = dckf.t.empty() ? ekf : dckf;
  std::string out = line({"t", "dckf_mean_err", "dckf_mean_nees", "ekf_mean_err", "ekf_mean_nees", "nees_bound"});
  for (std::size_t k = 0; k < ref.t.size(); ++k) {
    auto at = [&](const std::vector<double>& v) { return k < v.size() ? fmt(v[k]) : std::string(); };
    out += line({fmt(ref.t[k]), at(dckf.mean_err), at(dckf.mean_nees), at(ekf.mean_err), at(ekf.mean_nees),
                 fmt(ref.nees_bound)});
  }
  return out;
}

std::string format_histogram(const std::vector<double>& values, std::size_t bins) {
  std::vector<double> v;
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.empty() || bins == 0) return "";
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double x : v) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    ++counts[std::min(b, bins - 1)];
  }
  std::string out;
  for (std::size_t b = 0; b < bins; ++b) {
    out += fmt(lo + width * static_cast<double>(b)) + " " + fmt(lo + width * static_cast<double>(b + 1)) + " " +
           std::to_string(counts[b]) + "\n";
  }
  return out;
}

std::vector<std::string> emit_outputs(const DynamicStudyResult& result, const fs::path& dir) {
  Writer w(dir);
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    w.write("trials/" + trial_name(i, ".csv"), format_trial_csv(result.trials[i]));
    w.write("logs/" + trial_name(i, "_log.csv"), format_replay_log(result.logs[i]));
  }
  w.write("aggregate.csv", format_aggregate_csv(result.dckf, result.ekf));

  auto series = [&](const char* title, const std::vector<double>& a, const std::vector<double>& b) {
    const AggregateSeries& ref = result.dckf.t.empty() ? result.ekf : result.dckf;
    std::string out = std::string("# t ") + title + "\n";
    for (std::size_t k = 0; k < ref.t.size(); ++k) {
      out += fmt(ref.t[k]);
      out += " " + (k < a.size() ? fmt(a[k]) : std::string("nan"));
      out += " " + (k < b.size() ? fmt(b[k]) : std::string("nan"));
      out += "\n";
    }
    return out;
  };
  w.write("plot/error_vs_time.dat", series("dckf_mean_err ekf_mean_err", result.dckf.mean_err, result.ekf.mean_err));
  w.write("plot/nees_vs_time.dat",
          series("dckf_mean_nees ekf_mean_nees", result.dckf.mean_nees, result.ekf.mean_nees) + "# bound " +
              fmt(result.dckf.t.empty() ? result.ekf.nees_bound : result.dckf.nees_bound) + "\n");
  if (!result.trials.empty()) w.write("plot/sigma_bounds_trial0.dat", sigma_bounds(result.trials.front()));

  std::size_t clamps = 0, dckf_skipped = 0, ekf_skipped = 0;
  for (const TrialRecord& t : result.trials) {
    clamps += t.dckf_clamps;
    dckf_skipped += t.dckf_skipped_updates;
    ekf_skipped += t.ekf_skipped_updates;
  }
  w.write("summary.csv",
          key_values({{"trials", std::to_string(result.trials.size())},
                      {"dckf_time_avg_err", fmt(result.dckf.time_avg_err)},
                      {"ekf_time_avg_err", fmt(result.ekf.time_avg_err)},
                      {"error_reduction_percent", fmt(result.error_reduction_percent)},
                      {"nees_bound", fmt(result.dckf.t.empty() ? result.ekf.nees_bound : result.dckf.nees_bound)},
                      {"dckf_fraction_below_bound_after_5s",
                       result.dckf.t.empty() ? "" : fmt(result.dckf.fraction_below_bound(5.0))},
                      {"ekf_fraction_below_bound_after_5s",
                       result.ekf.t.empty() ? "" : fmt(result.ekf.fraction_below_bound(5.0))},
                      {"dckf_range_clamps", std::to_string(clamps)},
                      {"dckf_skipped_updates", std::to_string(dckf_skipped)},
                      {"ekf_skipped_updates", std::to_string(ekf_skipped)}}));
  return w.finish(result.config, "dynamic");
}

std::vector<std::string> emit_outputs(const SingleCorrectionResult& result, const fs::path& dir) {
  Writer w(dir);
  std::string table = line({"trial", "prior_range", "prior_sigma_max", "dckf_mahalanobis", "ekf_mahalanobis",
                            "dckf_error", "ekf_error", "dckf_kl", "ekf_kl"});
  std::vector<double> dm, em, dk, ek;
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const SingleCorrectionTrial& t = result.trials[i];
    table += line({std::to_string(i), fmt(t.prior_range), fmt(t.prior_sigma_max), fmt(t.dckf_mahalanobis),
                   fmt(t.ekf_mahalanobis), fmt(t.dckf_error), fmt(t.ekf_error), fmt(t.dckf_kl), fmt(t.ekf_kl)});
    dm.push_back(t.dckf_mahalanobis);
    em.push_back(t.ekf_mahalanobis);
    dk.push_back(t.dckf_kl);
    ek.push_back(t.ekf_kl);
  }
  w.write("trials.csv", table);
  w.write("plot/box.dat", "# metric filter min q1 median q3 max\n"
                          "mahalanobis dckf " + box_stats(dm) + "\n"
                          "mahalanobis ekf " + box_stats(em) + "\n"
                          "kl dckf " + box_stats(dk) + "\n"
                          "kl ekf " + box_stats(ek) + "\n");
  w.write("plot/hist_mahalanobis_dckf.dat", format_histogram(dm, 30));
  w.write("plot/hist_mahalanobis_ekf.dat", format_histogram(em, 30));
  w.write("plot/hist_kl_dckf.dat", format_histogram(dk, 30));
  w.write("plot/hist_kl_ekf.dat", format_histogram(ek, 30));
  if (result.example_clouds.pf.size() > 0) {
    w.write("plot/cloud_pf_trial0.dat", cloud_dat(result.example_clouds.pf));
    w.write("plot/cloud_dckf_trial0.dat", cloud_dat(result.example_clouds.dckf));
    w.write("plot/cloud_ekf_trial0.dat", cloud_dat(result.example_clouds.ekf));
  }
  w.write("summary.csv", key_values({{"trials", std::to_string(result.trials.size())},
                                     {"dckf_median_mahalanobis", fmt(median(dm))},
                                     {"ekf_median_mahalanobis", fmt(median(em))},
                                     {"dckf_median_kl", fmt(median(dk))},
                                     {"ekf_median_kl", fmt(median(ek))}}));
  return w.finish(result.config, "single-correction");
}

std::vector<std::string> emit_outputs(const ReplayResult& result, const fs::path& dir) {
  Writer w(dir);
  w.write("replay.csv", format_trial_csv(result.record));
  if (result.record.has_truth) w.write("plot/sigma_bounds.dat", sigma_bounds(result.record));
  std::vector<std::pair<std::string, std::string>> kv{
      {"rows", std::to_string(result.record.t.size())},
      {"dckf_skipped_updates", std::to_string(result.record.dckf_skipped_updates)},
      {"ekf_skipped_updates", std::to_string(result.record.ekf_skipped_updates)}};
  if (result.record.has_truth) {
    kv.insert(kv.end(), {{"dckf_pos_rmse", fmt(result.dckf_pos_rmse)},
                         {"dckf_vel_rmse", fmt(result.dckf_vel_rmse)},
                         {"dckf_mean_nees", fmt(result.dckf_mean_nees)},
                         {"ekf_pos_rmse", fmt(result.ekf_pos_rmse)},
                         {"ekf_vel_rmse", fmt(result.ekf_vel_rmse)},
                         {"ekf_mean_nees", fmt(result.ekf_mean_nees)}});
  }
  w.write("summary.csv", key_values(kv));
  return w.finish(result.config, "replay");
}

}  // namespace dircoord
