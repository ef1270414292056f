// Command-level orchestration: execute scenarios from config files and emit
// metrics CSVs, importance-field snapshots, resolved configs, and manifests.
#pragma once

#include "angleaware/engine.hpp"
#include "angleaware/simulator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace angleaware {

std::string version_string();

struct RunArtifacts {
  double final_J = 0.0;
  std::int64_t final_uncovered = 0;
  std::int64_t steps = 0;
  std::int64_t clamp_events = 0;
  std::string metrics_path;
  std::string out_dir;
};

// Runs a resolved config; writes metrics.csv, snapshot_t*.csv,
// resolved_config.cfg and manifest.txt under out_dir.
RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                          const std::string& config_path_label);

// seed_override < 0 keeps the config's seed. Returns a process exit code:
// 0 ok, 1 runtime/solver failure, 2 config rejection.
int cmd_run(const std::string& cfg_path, long long seed_override,
            const std::string& out_dir, RunArtifacts* artifacts = nullptr);

struct CompareReport {
  std::int64_t final_gimbal = 0;
  std::int64_t final_baseline = 0;
  double ratio = 0.0;  // gimbal / baseline, final uncovered counts
  // relative change of the uncovered count over the final 30 s of each mode
  double baseline_rel_change = 0.0;
  double gimbal_rel_change = 0.0;
  bool gimbal_final_lower = false;
};

int cmd_compare(const std::string& cfg_path, long long seed_override,
                const std::string& out_dir, CompareReport* report = nullptr);

int cmd_bench(const std::vector<std::int64_t>& m_list,
              const std::vector<int>& workers_list, const std::string& out_csv);

}  // namespace angleaware
