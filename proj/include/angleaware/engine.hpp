// Data-parallel batch evaluation over all m cells: perf, argmax partition,
// owner gradients, and per-drone constraint-term accumulators in one fused
// pass, plus covered-point recording and a timing harness.
//
// Determinism: cells are processed in fixed blocks of kEngineBlock; each block
// writes its own partial accumulators, and partials are combined serially in
// block index order. Results are therefore bit-identical for any worker count.
#pragma once

#include "angleaware/controller.hpp"
#include "angleaware/field.hpp"
#include "angleaware/geometry.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace angleaware {

inline constexpr std::int64_t kEngineBlock = 1024;

class Engine {
 public:
  // workers = 1 runs everything inline on the calling thread; workers = k > 1
  // starts k pool threads at construction.
  Engine(const GridSpec& spec, int workers = 1);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  std::int64_t m() const { return m_; }
  int workers() const { return nworkers_; }
  const GridSpec& spec() const { return spec_; }
  Cell cell(std::int64_t j) const { return spec_.cell_at(j); }

  // One fused pass: per cell the max perf over drones (hmax) and its argmax
  // (owner), plus per-drone accumulator sums over owned cells. accum is
  // resized to the drone count. All outputs must have length m.
  void fused_step(const std::vector<DroneState>& states,
                  const CameraParams& cam, bool xi1_extra_perf,
                  std::span<const double> psi, std::span<double> hmax,
                  std::span<int> owner, std::vector<CbfAccum>& accum);

  // Dense n x m perf matrix, drone-major: out[i*m + j].
  void batch_perf(const std::vector<DroneState>& states,
                  const CameraParams& cam, std::span<double> out);

  // Marks cells covered by any drone (in the FOV cone and within the
  // view-direction threshold); already-covered cells are left alone.
  void record_covered(const std::vector<DroneState>& states, double fov,
                      double cover_threshold, std::span<std::uint8_t> covered);

 private:
  struct Job {
    int kind = 0;  // 1 fused, 2 batch_perf, 3 covered
    int n = 0;
    CameraDerived cam{};
    bool extra_perf = false;
    const double* psi = nullptr;
    double* hmax = nullptr;
    int* owner = nullptr;
    double* perf_out = nullptr;
    double cos_fov = 0.0;
    double cos_thresh = 0.0;
    std::uint8_t* covered = nullptr;
  };

  void run_job();
  void worker_loop();
  void process_blocks();
  void process_block(std::int64_t b);

  GridSpec spec_;
  std::int64_t m_ = 0;
  std::int64_t nblocks_ = 0;
  // structure-of-arrays cell data: positions and view-direction components
  std::vector<double> cx_, cy_, cz_, vx_, vy_, vz_;

  std::vector<DroneFrame> frames_;
  std::vector<CbfAccum> partials_;  // nblocks * n, reset per fused pass
  Job job_;

  int nworkers_ = 1;
  std::vector<std::thread> pool_;
  std::mutex mu_;
  std::condition_variable cv_start_, cv_done_;
  std::uint64_t generation_ = 0;
  int done_count_ = 0;
  bool stop_ = false;
  std::atomic<std::int64_t> next_block_{0};
};

struct BenchResult {
  std::int64_t m = 0;
  int workers = 0;
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  int samples = 0;
};

// Times the fused pass on synthetic grids of roughly the requested sizes.
// Two warm-up passes per configuration are excluded from the statistics.
std::vector<BenchResult> bench(const std::vector<std::int64_t>& m_list,
                               const std::vector<int>& workers_list,
                               int samples = 20);

}  // namespace angleaware
