#include "angleaware/runner.hpp"

#include "angleaware/config.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace angleaware {

namespace {

void append_g17(std::string& s, double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  s += buf;
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_snapshot(const std::string& out_dir, double t,
                    const ImportanceField& field, const GridSpec& grid) {
  const std::vector<double> mean = angular_mean(field, grid);
  char name[64];
  std::snprintf(name, sizeof(name), "snapshot_t%g.csv", t);
  std::ofstream out(out_dir + "/" + name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot in " + out_dir);
  out << "x,y,z,psi_mean\n";
  std::string line;
  std::size_t s = 0;
  for (std::int64_t ix = 0; ix < grid.nx; ++ix) {
    for (std::int64_t iy = 0; iy < grid.ny; ++iy) {
      for (std::int64_t iz = 0; iz < grid.nz; ++iz, ++s) {
        line.clear();
        append_g17(line, grid.x_min + (static_cast<double>(ix) + 0.5) * grid.res_x);
        line += ',';
        append_g17(line, grid.y_min + (static_cast<double>(iy) + 0.5) * grid.res_y);
        line += ',';
        append_g17(line, grid.z_min + (static_cast<double>(iz) + 0.5) * grid.res_z);
        line += ',';
        append_g17(line, mean[s]);
        line += '\n';
        out << line;
      }
    }
  }
}

std::string cpu_model() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos && colon + 2 <= line.size()) {
        return line.substr(colon + 2);
      }
    }
  }
  return "unknown";
}

}  // namespace

std::string version_string() {
#ifdef AAC_VERSION
  return AAC_VERSION;
#else
  return "unknown";
#endif
}

static RunArtifacts run_scenario_impl(
    const ScenarioConfig& cfg_in, const std::string& out_dir,
    const std::string& config_path_label,
    std::vector<std::pair<double, std::int64_t>>* unc_series) {
  ScenarioConfig cfg = cfg_in;
  const std::string err = resolve_scenario(cfg);
  if (!err.empty()) throw std::invalid_argument("config rejected: " + err);
  const std::string started = iso_now();

  std::filesystem::create_directories(out_dir);
  Simulator sim(cfg);

  const std::string metrics_path = out_dir + "/metrics.csv";
  std::ofstream metrics(metrics_path, std::ios::binary);
  if (!metrics) throw std::runtime_error("cannot write " + metrics_path);
  std::string header = "t,J";
  for (int i = 0; i < cfg.n; ++i) {
    const std::string p = ",d" + std::to_string(i) + "_";
    header += p + "x" + p + "y" + p + "phi_h" + p + "phi_v" + p + "b_I" +
              p + "b_phi" + p + "w" + p + "kkt";
  }
  header += ",uncovered\n";
  metrics << header;

  const std::int64_t snap_every =
      cfg.snapshot_period > 0.0
          ? std::max<std::int64_t>(
                1, std::llround(cfg.snapshot_period / cfg.dt))
          : 0;

  std::string line;
  for (std::int64_t k = 0; k < sim.total_steps(); ++k) {
    if (snap_every > 0 && k % snap_every == 0) {
      write_snapshot(out_dir, static_cast<double>(k) * cfg.dt, sim.field(),
                     sim.grid());
    }
    const StepRecord rec = sim.step();
    line.clear();
    append_g17(line, rec.t);
    line += ',';
    append_g17(line, rec.J);
    for (const DroneStepRecord& d : rec.drones) {
      line += ',';
      append_g17(line, d.x);
      line += ',';
      append_g17(line, d.y);
      line += ',';
      append_g17(line, d.phi_h);
      line += ',';
      append_g17(line, d.phi_v);
      line += ',';
      append_g17(line, d.b_I);
      line += ',';
      append_g17(line, d.b_phi);
      line += ',';
      append_g17(line, d.w);
      line += ',';
      append_g17(line, d.kkt);
    }
    line += ',';
    line += std::to_string(rec.uncovered);
    line += '\n';
    metrics << line;
    if (unc_series) unc_series->emplace_back(rec.t, rec.uncovered);
  }
  if (snap_every > 0) {
    write_snapshot(out_dir,
                   static_cast<double>(sim.total_steps()) * cfg.dt, sim.field(),
                   sim.grid());
  }
  metrics.close();

  {
    std::ofstream rc(out_dir + "/resolved_config.cfg", std::ios::binary);
    rc << scenario_to_text(sim.config());
  }
  {
    std::ofstream mf(out_dir + "/manifest.txt", std::ios::binary);
    mf << "version = " << version_string() << "\n";
    mf << "config = " << config_path_label << "\n";
    mf << "out_dir = " << out_dir << "\n";
    mf << "start_time = " << started << "\n";
    mf << "steps = " << sim.steps_done() << "\n";
    std::string v;
    append_g17(v, sim.objective_value());
    mf << "final_J = " << v << "\n";
    mf << "final_uncovered = " << sim.uncovered_count() << "\n";
    mf << "phi_v_clamp_events = " << sim.clamp_events() << "\n";
    mf << "resolved_config = resolved_config.cfg\n";
    mf << "metrics = metrics.csv\n";
  }

  RunArtifacts art;
  art.final_J = sim.objective_value();
  art.final_uncovered = sim.uncovered_count();
  art.steps = sim.steps_done();
  art.clamp_events = sim.clamp_events();
  art.metrics_path = metrics_path;
  art.out_dir = out_dir;
  return art;
}

RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                          const std::string& config_path_label) {
  return run_scenario_impl(cfg, out_dir, config_path_label, nullptr);
}

int cmd_run(const std::string& cfg_path, long long seed_override,
            const std::string& out_dir, RunArtifacts* artifacts) {
  ScenarioConfig cfg;
  try {
    cfg = scenario_from_file(cfg_path);
    if (seed_override >= 0) {
      cfg.seed = static_cast<std::uint64_t>(seed_override);
    }
    const std::string err = resolve_scenario(cfg);
    if (!err.empty()) {
      std::cerr << "config rejected: " << err << "\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const std::string out =
      out_dir.empty()
          ? std::filesystem::path(cfg_path).stem().string() + "_out"
          : out_dir;
  try {
    const RunArtifacts art = run_scenario_impl(cfg, out, cfg_path, nullptr);
    if (artifacts) *artifacts = art;
    if (art.clamp_events > 0) {
      std::cerr << "warning: phi_v hard-clamped at integration "
                << art.clamp_events << " time(s)\n";
    }
    std::string j;
    append_g17(j, art.final_J);
    std::cout << "run complete: " << art.steps << " steps, final J = " << j
              << ", uncovered = " << art.final_uncovered << ", outputs in "
              << art.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

int cmd_compare(const std::string& cfg_path, long long seed_override,
                const std::string& out_dir, CompareReport* report) {
  ScenarioConfig base;
  try {
    base = scenario_from_file(cfg_path);
    if (seed_override >= 0) {
      base.seed = static_cast<std::uint64_t>(seed_override);
    }
    // resolve once so both modes share identical initial states
    const std::string err = resolve_scenario(base);
    if (!err.empty()) {
      std::cerr << "config rejected: " << err << "\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const std::string out =
      out_dir.empty()
          ? std::filesystem::path(cfg_path).stem().string() + "_compare"
          : out_dir;

  try {
    std::vector<std::pair<double, std::int64_t>> sg, sb;
    ScenarioConfig cg = base;
    cg.mode = ControlMode::Gimbal;
    ScenarioConfig cb = base;
    cb.mode = ControlMode::FixedBaseline;
    run_scenario_impl(cg, out + "/gimbal", cfg_path, &sg);
    run_scenario_impl(cb, out + "/baseline", cfg_path, &sb);
    if (sg.empty() || sg.size() != sb.size()) {
      throw std::runtime_error("compare: mismatched run lengths");
    }

    CompareReport rep;
    rep.final_gimbal = sg.back().second;
    rep.final_baseline = sb.back().second;
    rep.gimbal_final_lower = rep.final_gimbal < rep.final_baseline;
    rep.ratio = rep.final_baseline > 0
                    ? static_cast<double>(rep.final_gimbal) /
                          static_cast<double>(rep.final_baseline)
                    : (rep.final_gimbal == 0 ? 1.0
                                             : std::numeric_limits<double>::infinity());
    const double t_end = sg.back().first;
    const double t_win = t_end - 30.0;
    auto rel_change = [&](const std::vector<std::pair<double, std::int64_t>>& s) {
      std::int64_t at_win = s.front().second;
      for (const auto& p : s) {
        if (p.first >= t_win) {
          at_win = p.second;
          break;
        }
      }
      const double denom = std::max<double>(1.0, static_cast<double>(at_win));
      return static_cast<double>(at_win - s.back().second) / denom;
    };
    rep.baseline_rel_change = rel_change(sb);
    rep.gimbal_rel_change = rel_change(sg);

    {
      std::ofstream cc(out + "/compare.csv", std::ios::binary);
      cc << "t,uncovered_gimbal,uncovered_baseline\n";
      for (std::size_t i = 0; i < sg.size(); ++i) {
        std::string line;
        append_g17(line, sg[i].first);
        line += ',';
        line += std::to_string(sg[i].second);
        line += ',';
        line += std::to_string(sb[i].second);
        line += '\n';
        cc << line;
      }
    }
    {
      std::ofstream rp(out + "/report.txt", std::ios::binary);
      rp << "final_uncovered_gimbal = " << rep.final_gimbal << "\n";
      rp << "final_uncovered_baseline = " << rep.final_baseline << "\n";
      std::string r;
      append_g17(r, rep.ratio);
      rp << "final_ratio = " << r << "\n";
      r.clear();
      append_g17(r, rep.baseline_rel_change);
      rp << "baseline_rel_change_last_30s = " << r << "\n";
      r.clear();
      append_g17(r, rep.gimbal_rel_change);
      rp << "gimbal_rel_change_last_30s = " << r << "\n";
    }
    std::string r;
    append_g17(r, rep.ratio);
    std::cout << "compare complete: gimbal " << rep.final_gimbal
              << " vs baseline " << rep.final_baseline
              << " uncovered (ratio " << r << "), outputs in " << out << "\n";
    if (report) *report = rep;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

int cmd_bench(const std::vector<std::int64_t>& m_list,
              const std::vector<int>& workers_list,
              const std::string& out_csv) {
  try {
    const std::vector<BenchResult> results = bench(m_list, workers_list);
    std::cout << "host: " << std::thread::hardware_concurrency()
              << " hardware threads, " << cpu_model() << "\n";
    std::cout << "version: " << version_string() << "\n";
    std::printf("%10s %8s %12s %12s %8s\n", "m", "workers", "mean_ms",
                "p95_ms", "samples");
    for (const BenchResult& r : results) {
      std::printf("%10lld %8d %12.3f %12.3f %8d\n",
                  static_cast<long long>(r.m), r.workers, r.mean_ms, r.p95_ms,
                  r.samples);
    }
    if (!out_csv.empty()) {
      std::ofstream out(out_csv, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + out_csv);
      out << "m,workers,mean_ms,p95_ms\n";
      for (const BenchResult& r : results) {
        std::string line = std::to_string(r.m);
        line += ',';
        line += std::to_string(r.workers);
        line += ',';
        append_g17(line, r.mean_ms);
        line += ',';
        append_g17(line, r.p95_ms);
        line += '\n';
        out << line;
      }
      std::cout << "benchmark CSV written to " << out_csv << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

}  // namespace angleaware
