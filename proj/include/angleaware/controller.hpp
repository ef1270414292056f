// Per-drone CBF constraint assembly and the QP control step.
//
// Constraint terms for drone i over its owned cells V_i:
//   I_i  = sum_{j in V_i} delta * perf * psi_j          (coverage contribution)
//   xi1  = sum_{j in V_i} delta * d(perf)/dp * psi_j    (chain rule through p_i)
//   xi2  = -a1*gamma/n + sum_{j in V_i} (a1*delta*perf - delta^2*perf^2) * psi_j
//   chi1 = [0, 0, 0, -2*(phi_v - mid)],  mid = (phi_min + phi_max)/2
//   chi2 = a2 * ((phi_max - phi_min)^2 - (phi_v - mid)^2)
//   b_I  = I_i - gamma/n
//   b_phi = (phi_max - phi_min)^2 - (phi_v - mid)^2
//
// The control step solves
//   min eps*|u|^2 + w^2  s.t.  xi1'u + xi2 >= w,  chi1'u + chi2 >= 0,  u in box.
//
// b_phi keeps the full (phi_max - phi_min)^2 margin, so its zero set lies
// outside the physical gimbal range; the simulator hard-clamps phi_v at
// integration time as the backstop.
#pragma once

#include "angleaware/geometry.hpp"
#include "angleaware/qp_solver.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace angleaware {

struct ControllerParams {
  double gamma = 0.05;
  double a1 = 5.0;
  double a2 = 1.0;
  double delta = 5.0;
  double epsilon = 1e-4;
  double phi_min = kPi / 12.0;
  double phi_max = kPi / 2.0;
  double vmax_xy = 0.5;      // |u_x|, |u_y| bound [m/s]
  double vmax_gimbal = 1.0;  // |u_phi_h|, |u_phi_v| bound [rad/s]
  int n = 3;                 // drone count, for the gamma/n split
  // Alternative xi1 with an extra perf factor inside the sum; kept for
  // comparison, off by default (the chain rule produces no such factor).
  bool xi1_extra_perf = false;

  bool valid() const {
    return gamma > 0.0 && a1 > 0.0 && a2 > 0.0 && delta > 0.0 &&
           epsilon > 0.0 && 0.0 <= phi_min && phi_min < phi_max &&
           phi_max <= 0.5 * kPi && vmax_xy > 0.0 && vmax_gimbal > 0.0 &&
           n >= 1;
  }
};

struct CbfTerms {
  Eigen::Vector4d xi1 = Eigen::Vector4d::Zero();
  double xi2 = 0.0;
  Eigen::Vector4d chi1 = Eigen::Vector4d::Zero();
  double chi2 = 0.0;
  double I_i = 0.0;
  double b_I = 0.0;
  double b_phi = 0.0;
  bool guarded = false;  // some owned cell hit a gradient guard band
};

double coverage_contribution(const DroneState& s,
                             const std::vector<Cell>& cells_owned,
                             std::span<const double> psi, double delta,
                             const CameraParams& c);

// psi here is indexed position-for-position with cells_owned.
CbfTerms cbf_terms(const DroneState& s, const std::vector<Cell>& cells_owned,
                   std::span<const double> psi, const ControllerParams& params,
                   const CameraParams& c);

// Raw per-drone accumulator sums; lets the batch engine assemble CbfTerms
// without rescanning cells. xi1_sum already matches the configured xi1
// variant; delta and a1 weights are applied by assemble_cbf_terms.
struct CbfAccum {
  double sum_perf_psi = 0.0;   // sum perf * psi
  double sum_perf2_psi = 0.0;  // sum perf^2 * psi
  double xi1_sum[4] = {0.0, 0.0, 0.0, 0.0};  // sum grad * psi
  std::int64_t owned = 0;
  bool guarded = false;
};

CbfTerms assemble_cbf_terms(const DroneState& s, const CbfAccum& acc,
                            const ControllerParams& params);

enum class ControlMode {
  Gimbal,         // full 4D input
  FixedBaseline,  // planar input only, gimbal frozen
};

struct ControlResult {
  Eigen::Vector4d u = Eigen::Vector4d::Zero();
  double w = 0.0;
  QpStatus status = QpStatus::Optimal;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool slack_violating = false;  // w < 0: the gamma rate is not being met
  bool box_active = false;       // some velocity bound is tight
  bool degenerate = false;
  std::vector<int> active;  // 0 = coverage row, 1 = gimbal row
};

ControlResult control_step(const DroneState& s, const CbfTerms& terms,
                           const ControllerParams& params,
                           ControlMode mode = ControlMode::Gimbal);

}  // namespace angleaware
