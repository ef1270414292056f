#include "angleaware/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace angleaware {

std::string resolve_scenario(ScenarioConfig& cfg) {
  if (!cfg.grid.derive()) {
    return "grid: need min < max and 0 < resolution <= span per axis";
  }
  if (cfg.n < 1) return "n: need at least one drone";
  cfg.ctrl.n = cfg.n;
  if (!cfg.camera.valid()) {
    return "camera: need fov in (0, pi/2) and positive sigma1, sigma2";
  }
  if (!cfg.ctrl.valid()) {
    return "controller: need positive gains, epsilon, limits and "
           "0 <= phi_min < phi_max <= pi/2";
  }
  if (!(cfg.dt > 0.0)) return "dt: must be positive";
  if (cfg.ctrl.delta * cfg.dt >= 1.0) {
    return "delta*dt: must be < 1 for a stable importance update";
  }
  if (!(cfg.duration >= cfg.dt)) return "duration: must cover at least one step";
  if (!(cfg.shooting_rate > 0.0) || cfg.shooting_rate > 1.0 / cfg.dt + 1e-9) {
    return "shooting_rate: must be in (0, 1/dt]";
  }
  if (!(cfg.cover_threshold > 0.0)) return "cover_threshold: must be positive";
  if (!(cfg.psi0 >= 0.0)) return "psi0: must be nonnegative";
  if (!(cfg.workspace_margin >= 0.0)) return "workspace_margin: must be >= 0";
  if (cfg.snapshot_period < 0.0) return "snapshot_period: must be >= 0";
  if (cfg.workers < 1) return "workers: must be >= 1";
  if (!(cfg.z_c > 0.0)) return "z_c: must be positive";

  if (cfg.initial.empty()) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ux(cfg.grid.x_min, cfg.grid.x_max);
    std::uniform_real_distribution<double> uy(cfg.grid.y_min, cfg.grid.y_max);
    const double phi_v0 =
        std::clamp(0.5 * kPi, cfg.ctrl.phi_min, cfg.ctrl.phi_max);
    for (int i = 0; i < cfg.n; ++i) {
      cfg.initial.emplace_back(ux(rng), uy(rng), 0.0, phi_v0, cfg.z_c);
    }
  }
  if (static_cast<int>(cfg.initial.size()) != cfg.n) {
    return "initial: drone state count must equal n";
  }
  for (DroneState& s : cfg.initial) {
    s.z_c = cfg.z_c;
    s.phi_h = wrap_two_pi(s.phi_h);
    if (!(s.phi_v > 0.0) || s.phi_v > 0.5 * kPi + 1e-12) {
      return "initial: phi_v must lie in (0, pi/2]";
    }
  }
  return "";
}

Simulator::Simulator(const ScenarioConfig& cfg) : cfg_(cfg) {
  ScenarioConfig check = cfg_;
  const std::string err = resolve_scenario(check);
  if (!err.empty()) throw std::invalid_argument("Simulator: " + err);
  cfg_ = check;

  engine_ = std::make_unique<Engine>(cfg_.grid, cfg_.workers);
  cfg_.grid = engine_->spec();  // derived counts
  states_ = cfg_.initial;
  field_ = make_field(cfg_.grid.m, cfg_.psi0);
  hmax_.resize(static_cast<std::size_t>(cfg_.grid.m));
  owner_.resize(static_cast<std::size_t>(cfg_.grid.m));
  covered_.assign(static_cast<std::size_t>(cfg_.grid.m), 0);
  uncovered_ = cfg_.grid.m;
  total_steps_ = static_cast<std::int64_t>(
      std::llround(std::floor(cfg_.duration / cfg_.dt + 1e-9)));
  shoot_every_ = std::max<std::int64_t>(
      1, std::llround(1.0 / (cfg_.shooting_rate * cfg_.dt)));
  ws_x_min_ = cfg_.grid.x_min - cfg_.workspace_margin;
  ws_x_max_ = cfg_.grid.x_max + cfg_.workspace_margin;
  ws_y_min_ = cfg_.grid.y_min - cfg_.workspace_margin;
  ws_y_max_ = cfg_.grid.y_max + cfg_.workspace_margin;
}

StepRecord Simulator::step() {
  const std::int64_t k = steps_done_;
  const bool gimbal = cfg_.mode == ControlMode::Gimbal;

  // (1) partition + constraint accumulators on the start-of-step snapshot
  engine_->fused_step(states_, cfg_.camera, cfg_.ctrl.xi1_extra_perf,
                      field_.psi, hmax_, owner_, accum_);

  // (2) per-drone control
  std::vector<CbfTerms> terms(states_.size());
  std::vector<ControlResult> results(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    terms[i] = assemble_cbf_terms(states_[i], accum_[i], cfg_.ctrl);
    results[i] = control_step(states_[i], terms[i], cfg_.ctrl, cfg_.mode);
    if (results[i].status != QpStatus::Optimal) {
      std::ostringstream os;
      os << "control QP failed at step " << k << " drone " << i
         << " (status " << static_cast<int>(results[i].status)
         << ", kkt " << results[i].kkt_residual << ")";
      throw std::runtime_error(os.str());
    }
  }

  // (3) covered-point recording at the shooting cadence
  if (k % shoot_every_ == 0) {
    engine_->record_covered(states_, cfg_.camera.fov, cfg_.cover_threshold,
                            covered_);
    std::int64_t unc = 0;
    for (const std::uint8_t c : covered_) unc += (c == 0);
    uncovered_ = unc;
  }

  StepRecord rec;
  rec.t = static_cast<double>(k) * cfg_.dt;
  rec.J = objective(field_);
  rec.uncovered = uncovered_;
  rec.drones.resize(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    DroneStepRecord& d = rec.drones[i];
    d.x = states_[i].x;
    d.y = states_[i].y;
    d.phi_h = states_[i].phi_h;
    d.phi_v = states_[i].phi_v;
    d.b_I = terms[i].b_I;
    d.b_phi = terms[i].b_phi;
    d.w = results[i].w;
    d.kkt = results[i].kkt_residual;
    d.slack_violating = results[i].slack_violating;
    d.box_active = results[i].box_active;
  }

  // (4) integrate, wrap, clamp
  for (std::size_t i = 0; i < states_.size(); ++i) {
    DroneState& s = states_[i];
    const Eigen::Vector4d& u = results[i].u;
    s.x = std::clamp(s.x + u[0] * cfg_.dt, ws_x_min_, ws_x_max_);
    s.y = std::clamp(s.y + u[1] * cfg_.dt, ws_y_min_, ws_y_max_);
    if (gimbal) {
      s.phi_h = wrap_two_pi(s.phi_h + u[2] * cfg_.dt);
      double pv = s.phi_v + u[3] * cfg_.dt;
      if (pv < cfg_.ctrl.phi_min || pv > cfg_.ctrl.phi_max) {
        pv = std::clamp(pv, cfg_.ctrl.phi_min, cfg_.ctrl.phi_max);
        ++clamp_events_;
      }
      s.phi_v = pv;
    }
  }

  // (5) importance decay from the start-of-step observation
  update_importance(field_, hmax_, cfg_.ctrl.delta, cfg_.dt);

  ++steps_done_;
  return rec;
}

}  // namespace angleaware
