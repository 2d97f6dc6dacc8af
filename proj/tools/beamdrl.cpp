// Copyright 2026 The beamdrl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: run, sweep and stats subcommands.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beamdrl.hpp"

namespace fs = std::filesystem;
using namespace beamdrl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSingular = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::vector<std::string> policies;
  std::optional<std::size_t> slots;
  bool deterministic = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "Config file (key = value); full-size defaults if omitted");
  app->add_option("--seed", f.seed, "Run a single seed instead of the configured list");
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
  app->add_option("--policy", f.policies, "Policies to run (ddrl,pdrl,cdrl,zf,sah,greedy,random)")
      ->delimiter(',');
  app->add_option("--slots", f.slots, "Number of slots");
  app->add_flag("--deterministic", f.deterministic, "Single-threaded, bit-reproducible execution");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? full_profile() : load_config(f.config);
  if (f.seed) cfg.seeds = {*f.seed};
  if (!f.policies.empty()) cfg.policies = f.policies;
  if (f.slots) cfg.slots = *f.slots;
  cfg.validate();
  return cfg;
}

// Writes runs.csv, summary.csv and the effective config; returns the exit code.
int write_run(const ExperimentConfig& cfg, const RunRecord& rec, const fs::path& dir) {
  fs::create_directories(dir);
  emit_csv(rec.rows, cfg.env.channel.users, cfg.env.channel.users * cfg.env.streams,
           (dir / "runs.csv").string());
  std::ofstream sum(dir / "summary.csv", std::ios::binary);
  write_summary_csv(rec.summaries, sum);
  save_config(cfg, (dir / "config.cfg").string());
  return rec.fully_failed() ? kExitSingular : 0;
}

void print_summaries(const std::vector<PolicySummary>& sums) {
  for (const auto& s : sums) {
    std::cout << s.policy << " seed=" << s.seed << " ok=" << s.ok_slots << "/" << s.slots
              << " final_ma=" << s.final_moving_average << " mean=" << s.rates.mean
              << " median=" << s.rates.median << '\n';
  }
}

int cmd_run(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const RunRecord rec = run_experiment(cfg);
  print_summaries(rec.summaries);
  const int code = write_run(cfg, rec, f.out);
  if (code == kExitSingular) std::cerr << "error: a policy could not transmit in any slot\n";
  return code;
}

int cmd_sweep(const CommonFlags& f, const std::vector<std::string>& grid) {
  const ExperimentConfig base = resolve(f);
  std::vector<SweepAxis> axes;
  for (const auto& g : grid) axes.push_back(parse_sweep_axis(g));
  const auto points = sweep_points(base, axes);
  fs::create_directories(f.out);
  std::ofstream index(fs::path(f.out) / "sweep.csv", std::ios::binary);
  index << "point";
  for (const auto& a : axes) index << ',' << a.key;
  index << ",policy,seed,final_moving_average,mean\n";
  int code = 0;
  for (const auto& p : points) {
    const std::string label = sweep_label(p);
    std::cout << "[" << label << "]\n";
    const RunRecord rec = run_experiment(p.config);
    print_summaries(rec.summaries);
    if (write_run(p.config, rec, fs::path(f.out) / label) != 0) code = kExitSingular;
    for (const auto& s : rec.summaries) {
      index << label;
      for (const auto& kv : p.assignment) index << ',' << kv.second;
      index << ',' << s.policy << ',' << s.seed << ',' << detail::format_real(s.final_moving_average)
            << ',' << detail::format_real(s.rates.mean) << '\n';
    }
  }
  return code;
}

int cmd_stats(const std::string& in, const std::string& policy, std::size_t grid_points,
              const std::string& out) {
  const auto rows = load_csv(in);
  std::map<std::pair<std::string, std::uint64_t>, bool> keys;
  for (const auto& r : rows) {
    if (policy.empty() || r.policy == policy) keys[{r.policy, r.seed}] = true;
  }
  std::ofstream file;
  if (!out.empty()) file.open(out, std::ios::binary);
  std::ostream& os = out.empty() ? std::cout : file;
  os << "policy,seed,kind,x,y\n";
  for (const auto& [key, unused] : keys) {
    (void)unused;
    const auto x = rate_series(rows, key.first, key.second);
    if (x.empty()) continue;
    const DistributionStats d = distribution_stats(x, grid_points);
    const std::string tag = key.first + ',' + std::to_string(key.second) + ',';
    os << tag << "min,," << detail::format_real(d.min) << '\n'
       << tag << "q1,," << detail::format_real(d.q1) << '\n'
       << tag << "median,," << detail::format_real(d.median) << '\n'
       << tag << "q3,," << detail::format_real(d.q3) << '\n'
       << tag << "max,," << detail::format_real(d.max) << '\n'
       << tag << "mean,," << detail::format_real(d.mean) << '\n';
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
      os << tag << "cdf," << detail::format_real(d.grid[i]) << ',' << detail::format_real(d.cdf[i]) << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent deep Q-learning beam selection under channel aging"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Train/evaluate the configured policies");
  add_common(run, run_flags);

  CommonFlags sweep_flags;
  std::vector<std::string> grid;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a grid over config keys");
  add_common(sweep, sweep_flags);
  sweep->add_option("--grid", grid, "key=v1,v2,... (repeatable)")->required();

  std::string stats_in, stats_policy, stats_out;
  std::size_t grid_points = 101;
  CLI::App* stats = app.add_subcommand("stats", "CDF, quartiles and whiskers of average rates in a runs.csv");
  stats->add_option("--in", stats_in, "runs.csv produced by run")->required();
  stats->add_option("--policy", stats_policy, "Restrict to one policy");
  stats->add_option("--grid-points", grid_points, "CDF grid size")->capture_default_str();
  stats->add_option("--out", stats_out, "Write to this file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags, grid);
    if (*stats) return cmd_stats(stats_in, stats_policy, grid_points, stats_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
