#include "angleaware/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace angleaware {

Engine::Engine(const GridSpec& spec, int workers) : spec_(spec) {
  if (!spec_.derive()) {
    throw std::invalid_argument("Engine: invalid GridSpec");
  }
  m_ = spec_.m;
  nblocks_ = (m_ + kEngineBlock - 1) / kEngineBlock;
  cx_.resize(static_cast<std::size_t>(m_));
  cy_.resize(static_cast<std::size_t>(m_));
  cz_.resize(static_cast<std::size_t>(m_));
  vx_.resize(static_cast<std::size_t>(m_));
  vy_.resize(static_cast<std::size_t>(m_));
  vz_.resize(static_cast<std::size_t>(m_));
  for (std::int64_t j = 0; j < m_; ++j) {
    const Cell q = spec_.cell_at(j);
    const std::size_t u = static_cast<std::size_t>(j);
    cx_[u] = q.x;
    cy_[u] = q.y;
    cz_[u] = q.z;
    const double cv = std::cos(q.theta_v);
    vx_[u] = std::cos(q.theta_h) * cv;
    vy_[u] = std::sin(q.theta_h) * cv;
    vz_[u] = std::sin(q.theta_v);
  }
  frames_.reserve(16);

  nworkers_ = std::max(1, workers);
  if (nworkers_ > 1) {
    pool_.reserve(static_cast<std::size_t>(nworkers_));
    for (int i = 0; i < nworkers_; ++i) {
      pool_.emplace_back([this] { worker_loop(); });
    }
  }
}

Engine::~Engine() {
  if (!pool_.empty()) {
    {
      std::lock_guard<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_start_.notify_all();
    for (std::thread& t : pool_) t.join();
  }
}

void Engine::worker_loop() {
  std::uint64_t seen = 0;
  for (;;) {
    {
      std::unique_lock<std::mutex> lk(mu_);
      cv_start_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    process_blocks();
    {
      std::lock_guard<std::mutex> lk(mu_);
      if (++done_count_ == nworkers_) cv_done_.notify_all();
    }
  }
}

void Engine::process_blocks() {
  for (;;) {
    const std::int64_t b = next_block_.fetch_add(1, std::memory_order_relaxed);
    if (b >= nblocks_) return;
    process_block(b);
  }
}

void Engine::run_job() {
  if (nworkers_ == 1) {
    next_block_.store(0, std::memory_order_relaxed);
    process_blocks();
    return;
  }
  {
    std::lock_guard<std::mutex> lk(mu_);
    next_block_.store(0, std::memory_order_relaxed);
    done_count_ = 0;
    ++generation_;
  }
  cv_start_.notify_all();
  std::unique_lock<std::mutex> lk(mu_);
  cv_done_.wait(lk, [&] { return done_count_ == nworkers_; });
}

void Engine::process_block(std::int64_t b) {
  const std::int64_t j0 = b * kEngineBlock;
  const std::int64_t j1 = std::min(m_, j0 + kEngineBlock);
  const int n = job_.n;

  if (job_.kind == 1) {
    CbfAccum* pacc = partials_.data() + static_cast<std::size_t>(b) *
                                            static_cast<std::size_t>(n);
    for (int i = 0; i < n; ++i) pacc[i] = CbfAccum{};
    for (std::int64_t j = j0; j < j1; ++j) {
      const std::size_t u = static_cast<std::size_t>(j);
      const double cxj = cx_[u], cyj = cy_[u], czj = cz_[u];
      const double vxj = vx_[u], vyj = vy_[u], vzj = vz_[u];
      double best = -1.0;
      int win = 0;
      for (int i = 0; i < n; ++i) {
        const double p = perf_value(frames_[static_cast<std::size_t>(i)], cxj,
                                    cyj, czj, vxj, vyj, vzj, job_.cam);
        if (p > best) {
          best = p;
          win = i;
        }
      }
      job_.hmax[u] = best;
      job_.owner[u] = win;
      const double pj = job_.psi[u];
      const PerfGrad pg =
          perf_with_gradient(frames_[static_cast<std::size_t>(win)], cxj, cyj,
                             czj, vxj, vyj, vzj, job_.cam);
      CbfAccum& a = pacc[win];
      a.sum_perf_psi += pg.value * pj;
      a.sum_perf2_psi += pg.value * pg.value * pj;
      const double gw = job_.extra_perf ? pg.value * pj : pj;
      a.xi1_sum[0] += pg.d[0] * gw;
      a.xi1_sum[1] += pg.d[1] * gw;
      a.xi1_sum[2] += pg.d[2] * gw;
      a.xi1_sum[3] += pg.d[3] * gw;
      a.guarded |= pg.guarded;
      ++a.owned;
    }
    return;
  }

  if (job_.kind == 2) {
    for (int i = 0; i < n; ++i) {
      double* out = job_.perf_out + static_cast<std::size_t>(i) *
                                        static_cast<std::size_t>(m_);
      const DroneFrame& f = frames_[static_cast<std::size_t>(i)];
      for (std::int64_t j = j0; j < j1; ++j) {
        const std::size_t u = static_cast<std::size_t>(j);
        out[u] = perf_value(f, cx_[u], cy_[u], cz_[u], vx_[u], vy_[u], vz_[u],
                            job_.cam);
      }
    }
    return;
  }

  // kind == 3: covered recording
  for (std::int64_t j = j0; j < j1; ++j) {
    const std::size_t u = static_cast<std::size_t>(j);
    if (job_.covered[u]) continue;
    for (int i = 0; i < n; ++i) {
      if (covered_pair(frames_[static_cast<std::size_t>(i)], cx_[u], cy_[u],
                       cz_[u], vx_[u], vy_[u], vz_[u], job_.cos_fov,
                       job_.cos_thresh)) {
        job_.covered[u] = 1;
        break;
      }
    }
  }
}

void Engine::fused_step(const std::vector<DroneState>& states,
                        const CameraParams& cam, bool xi1_extra_perf,
                        std::span<const double> psi, std::span<double> hmax,
                        std::span<int> owner, std::vector<CbfAccum>& accum) {
  const int n = static_cast<int>(states.size());
  if (n < 1) throw std::invalid_argument("fused_step: need n >= 1");
  if (static_cast<std::int64_t>(psi.size()) != m_ ||
      static_cast<std::int64_t>(hmax.size()) != m_ ||
      static_cast<std::int64_t>(owner.size()) != m_) {
    throw std::invalid_argument("fused_step: buffer length mismatch");
  }
  frames_.clear();
  for (const DroneState& s : states) frames_.push_back(DroneFrame::from(s));
  partials_.resize(static_cast<std::size_t>(nblocks_) *
                   static_cast<std::size_t>(n));

  job_ = Job{};
  job_.kind = 1;
  job_.n = n;
  job_.cam = CameraDerived::from(cam);
  job_.extra_perf = xi1_extra_perf;
  job_.psi = psi.data();
  job_.hmax = hmax.data();
  job_.owner = owner.data();
  run_job();

  // serial combine in block index order: worker-count independent
  accum.assign(static_cast<std::size_t>(n), CbfAccum{});
  for (std::int64_t b = 0; b < nblocks_; ++b) {
    const CbfAccum* pacc = partials_.data() + static_cast<std::size_t>(b) *
                                                  static_cast<std::size_t>(n);
    for (int i = 0; i < n; ++i) {
      CbfAccum& a = accum[static_cast<std::size_t>(i)];
      const CbfAccum& p = pacc[i];
      a.sum_perf_psi += p.sum_perf_psi;
      a.sum_perf2_psi += p.sum_perf2_psi;
      a.xi1_sum[0] += p.xi1_sum[0];
      a.xi1_sum[1] += p.xi1_sum[1];
      a.xi1_sum[2] += p.xi1_sum[2];
      a.xi1_sum[3] += p.xi1_sum[3];
      a.guarded |= p.guarded;
      a.owned += p.owned;
    }
  }
}

void Engine::batch_perf(const std::vector<DroneState>& states,
                        const CameraParams& cam, std::span<double> out) {
  const int n = static_cast<int>(states.size());
  if (n < 1) throw std::invalid_argument("batch_perf: need n >= 1");
  if (static_cast<std::int64_t>(out.size()) !=
      m_ * static_cast<std::int64_t>(n)) {
    throw std::invalid_argument("batch_perf: output length mismatch");
  }
  frames_.clear();
  for (const DroneState& s : states) frames_.push_back(DroneFrame::from(s));
  job_ = Job{};
  job_.kind = 2;
  job_.n = n;
  job_.cam = CameraDerived::from(cam);
  job_.perf_out = out.data();
  run_job();
}

void Engine::record_covered(const std::vector<DroneState>& states, double fov,
                            double cover_threshold,
                            std::span<std::uint8_t> covered) {
  const int n = static_cast<int>(states.size());
  if (n < 1) throw std::invalid_argument("record_covered: need n >= 1");
  if (static_cast<std::int64_t>(covered.size()) != m_) {
    throw std::invalid_argument("record_covered: buffer length mismatch");
  }
  frames_.clear();
  for (const DroneState& s : states) frames_.push_back(DroneFrame::from(s));
  job_ = Job{};
  job_.kind = 3;
  job_.n = n;
  job_.cos_fov = std::cos(fov);
  job_.cos_thresh = std::cos(cover_threshold);
  job_.covered = covered.data();
  run_job();
}

std::vector<BenchResult> bench(const std::vector<std::int64_t>& m_list,
                               const std::vector<int>& workers_list,
                               int samples) {
  std::vector<BenchResult> results;
  for (const std::int64_t target : m_list) {
    // synthetic grid: 5 z-layers, 6 x 5 angular samples, square xy layout
    const std::int64_t per_xy = 5 * 6 * 5;
    const std::int64_t nx = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(
               std::sqrt(static_cast<double>(target) / per_xy))));
    GridSpec spec;
    spec.x_min = -1.0;
    spec.x_max = 1.0;
    spec.y_min = -1.0;
    spec.y_max = 1.0;
    spec.res_x = 2.0 / static_cast<double>(nx);
    spec.res_y = spec.res_x;
    spec.z_min = 0.0;
    spec.z_max = 0.5;
    spec.res_z = 0.1;
    spec.th_min = -kPi;
    spec.th_max = kPi;
    spec.res_th = kTwoPi / 6.0;
    spec.tv_min = kPi / 6.0;
    spec.tv_max = kPi / 2.0;
    spec.res_tv = (kPi / 3.0) / 5.0;
    if (!spec.derive()) continue;

    const std::vector<DroneState> states = {
        {1.0, 0.2, 0.0, 0.5 * kPi, 1.0},
        {-1.0, -0.2, 0.0, 0.5 * kPi, 1.0},
        {0.0, 0.5, 0.0, 0.5 * kPi, 1.0},
    };
    const CameraParams cam;
    const std::vector<double> psi(static_cast<std::size_t>(spec.m), 1.0);
    std::vector<double> hmax(static_cast<std::size_t>(spec.m));
    std::vector<int> owner(static_cast<std::size_t>(spec.m));
    std::vector<CbfAccum> accum;

    for (const int w : workers_list) {
      Engine eng(spec, w);
      for (int k = 0; k < 2; ++k) {
        eng.fused_step(states, cam, false, psi, hmax, owner, accum);
      }
      std::vector<double> times;
      times.reserve(static_cast<std::size_t>(samples));
      for (int k = 0; k < samples; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        eng.fused_step(states, cam, false, psi, hmax, owner, accum);
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
      std::sort(times.begin(), times.end());
      double mean = 0.0;
      for (double t : times) mean += t;
      mean /= static_cast<double>(times.size());
      const std::size_t p95_idx = static_cast<std::size_t>(
          std::min<double>(static_cast<double>(times.size()) - 1.0,
                           std::ceil(0.95 * static_cast<double>(times.size())) - 1.0));
      results.push_back({spec.m, w, mean, times[p95_idx],
                         static_cast<int>(times.size())});
    }
  }
  return results;
}

}  // namespace angleaware
