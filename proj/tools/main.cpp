#include "angleaware/runner.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"angle-aware multi-drone coverage simulator"};
  app.require_subcommand(1);

  std::string run_cfg, run_out;
  long long run_seed = -1;
  CLI::App* run = app.add_subcommand("run", "run one scenario config");
  run->add_option("config", run_cfg, "scenario config file")->required();
  run->add_option("--seed", run_seed, "override the config seed");
  run->add_option("--out", run_out, "output directory");

  std::string cmp_cfg, cmp_out;
  long long cmp_seed = -1;
  CLI::App* cmp = app.add_subcommand(
      "compare", "run gimbal and fixed-camera baseline modes on one config");
  cmp->add_option("config", cmp_cfg, "scenario config file")->required();
  cmp->add_option("--seed", cmp_seed, "override the config seed");
  cmp->add_option("--out", cmp_out, "output directory");

  std::vector<std::int64_t> bench_m;
  std::vector<int> bench_w;
  std::string bench_csv = "bench.csv";
  CLI::App* bench = app.add_subcommand("bench", "time the batch engine");
  bench->add_option("--m", bench_m, "cell counts to time")->delimiter(',');
  bench->add_option("--workers", bench_w, "worker counts to time")
      ->delimiter(',');
  bench->add_option("--csv", bench_csv, "benchmark CSV path ('' disables)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return angleaware::cmd_run(run_cfg, run_seed, run_out);
  }
  if (cmp->parsed()) {
    return angleaware::cmd_compare(cmp_cfg, cmp_seed, cmp_out);
  }
  if (bench_m.empty()) bench_m = {10000, 100000, 1000000};
  if (bench_w.empty()) {
    bench_w = {1, 2, 4};
    const int hw = static_cast<int>(
        std::max(1u, std::thread::hardware_concurrency()));
    if (std::find(bench_w.begin(), bench_w.end(), hw) == bench_w.end()) {
      bench_w.push_back(hw);
    }
  }
  return angleaware::cmd_bench(bench_m, bench_w, bench_csv);
}
