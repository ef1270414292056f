// Closed-loop scenario execution: partition, per-drone control, integration,
// importance decay, covered-point recording, and per-step metrics.
#pragma once

#include "angleaware/controller.hpp"
#include "angleaware/engine.hpp"
#include "angleaware/field.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace angleaware {

struct ScenarioConfig {
  GridSpec grid;
  int n = 3;
  std::vector<DroneState> initial;  // size n, or empty for seeded placement
  double z_c = 1.0;
  CameraParams camera;
  ControllerParams ctrl;
  double dt = 0.1;            // [s]
  double duration = 150.0;    // [s]
  double shooting_rate = 5.0; // [Hz], covered-point recording cadence
  double cover_threshold = kPi / 16.0;
  ControlMode mode = ControlMode::Gimbal;
  std::uint64_t seed = 0;
  double workspace_margin = 1.0;  // P = grid xy-bounds inflated by this [m]
  double snapshot_period = 10.0;  // [s] of simulated time; 0 disables
  int workers = 1;
  double psi0 = 1.0;
};

// Validates cfg and fills derived state (grid counts, ctrl.n, seeded initial
// states when none are given). Returns "" on success, else a message naming
// the violated invariant.
std::string resolve_scenario(ScenarioConfig& cfg);

struct DroneStepRecord {
  double x = 0.0, y = 0.0, phi_h = 0.0, phi_v = 0.0;
  double b_I = 0.0, b_phi = 0.0, w = 0.0, kkt = 0.0;
  bool slack_violating = false;
  bool box_active = false;
};

struct StepRecord {
  double t = 0.0;
  double J = 0.0;
  std::vector<DroneStepRecord> drones;
  std::int64_t uncovered = 0;
};

class Simulator {
 public:
  // cfg must already be resolved via resolve_scenario
  explicit Simulator(const ScenarioConfig& cfg);

  // One control period. The returned record carries start-of-step time,
  // objective, and states, together with the control decision taken then.
  StepRecord step();

  std::int64_t steps_done() const { return steps_done_; }
  std::int64_t total_steps() const { return total_steps_; }
  double time() const { return static_cast<double>(steps_done_) * cfg_.dt; }
  double objective_value() const { return objective(field_); }
  const std::vector<DroneState>& states() const { return states_; }
  const ImportanceField& field() const { return field_; }
  const std::vector<std::uint8_t>& covered() const { return covered_; }
  std::int64_t uncovered_count() const { return uncovered_; }
  const ScenarioConfig& config() const { return cfg_; }
  const GridSpec& grid() const { return engine_->spec(); }
  // number of integration steps where phi_v needed a hard clamp
  std::int64_t clamp_events() const { return clamp_events_; }

 private:
  ScenarioConfig cfg_;
  std::unique_ptr<Engine> engine_;
  std::vector<DroneState> states_;
  ImportanceField field_;
  std::vector<double> hmax_;
  std::vector<int> owner_;
  std::vector<CbfAccum> accum_;
  std::vector<std::uint8_t> covered_;
  std::int64_t uncovered_ = 0;
  std::int64_t steps_done_ = 0;
  std::int64_t total_steps_ = 0;
  std::int64_t shoot_every_ = 1;
  std::int64_t clamp_events_ = 0;
  double ws_x_min_, ws_x_max_, ws_y_min_, ws_y_max_;
};

}  // namespace angleaware
