#include "angleaware/controller.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace angleaware {

double coverage_contribution(const DroneState& s,
                             const std::vector<Cell>& cells_owned,
                             std::span<const double> psi, double delta,
                             const CameraParams& c) {
  if (psi.size() != cells_owned.size()) {
    throw std::invalid_argument("coverage_contribution: psi length mismatch");
  }
  const DroneFrame f = DroneFrame::from(s);
  const CameraDerived cam = CameraDerived::from(c);
  double acc = 0.0;
  for (std::size_t k = 0; k < cells_owned.size(); ++k) {
    const Cell& q = cells_owned[k];
    const Eigen::Vector3d v = view_direction(q);
    acc += perf_value(f, q.x, q.y, q.z, v.x(), v.y(), v.z(), cam) * psi[k];
  }
  return delta * acc;
}

CbfTerms cbf_terms(const DroneState& s, const std::vector<Cell>& cells_owned,
                   std::span<const double> psi, const ControllerParams& params,
                   const CameraParams& c) {
  if (psi.size() != cells_owned.size()) {
    throw std::invalid_argument("cbf_terms: psi length mismatch");
  }
  const DroneFrame f = DroneFrame::from(s);
  const CameraDerived cam = CameraDerived::from(c);
  CbfAccum acc;
  for (std::size_t k = 0; k < cells_owned.size(); ++k) {
    const Cell& q = cells_owned[k];
    const Eigen::Vector3d v = view_direction(q);
    const PerfGrad pg = perf_with_gradient(f, q.x, q.y, q.z, v.x(), v.y(),
                                           v.z(), cam);
    const double pj = psi[k];
    acc.sum_perf_psi += pg.value * pj;
    acc.sum_perf2_psi += pg.value * pg.value * pj;
    const double gw = params.xi1_extra_perf ? pg.value * pj : pj;
    acc.xi1_sum[0] += pg.d[0] * gw;
    acc.xi1_sum[1] += pg.d[1] * gw;
    acc.xi1_sum[2] += pg.d[2] * gw;
    acc.xi1_sum[3] += pg.d[3] * gw;
    acc.guarded |= pg.guarded;
    ++acc.owned;
  }
  return assemble_cbf_terms(s, acc, params);
}

CbfTerms assemble_cbf_terms(const DroneState& s, const CbfAccum& acc,
                            const ControllerParams& params) {
  CbfTerms t;
  const double d = params.delta;
  t.I_i = d * acc.sum_perf_psi;
  t.xi1 = d * Eigen::Vector4d(acc.xi1_sum[0], acc.xi1_sum[1], acc.xi1_sum[2],
                              acc.xi1_sum[3]);
  const double gn = params.gamma / static_cast<double>(params.n);
  t.xi2 = -params.a1 * gn + params.a1 * d * acc.sum_perf_psi -
          d * d * acc.sum_perf2_psi;
  t.b_I = t.I_i - gn;

  const double mid = 0.5 * (params.phi_min + params.phi_max);
  const double range = params.phi_max - params.phi_min;
  const double dev = s.phi_v - mid;
  t.chi1 = Eigen::Vector4d(0.0, 0.0, 0.0, -2.0 * dev);
  t.b_phi = range * range - dev * dev;
  t.chi2 = params.a2 * t.b_phi;
  t.guarded = acc.guarded;
  return t;
}

ControlResult control_step(const DroneState& s, const CbfTerms& terms,
                           const ControllerParams& params, ControlMode mode) {
  (void)s;
  if (!params.valid()) {
    throw std::invalid_argument("control_step: invalid ControllerParams");
  }
  const double inf = std::numeric_limits<double>::infinity();
  const bool gimbal = mode == ControlMode::Gimbal;
  const Eigen::Index nu = gimbal ? 4 : 2;  // input components in the QP
  const Eigen::Index nz = nu + 1;          // plus the slack

  QpProblem p;
  p.diag = Eigen::VectorXd::Constant(nz, params.epsilon);
  p.diag[nu] = 1.0;
  p.lo = Eigen::VectorXd::Constant(nz, -inf);
  p.hi = Eigen::VectorXd::Constant(nz, inf);
  p.lo[0] = -params.vmax_xy;
  p.hi[0] = params.vmax_xy;
  p.lo[1] = -params.vmax_xy;
  p.hi[1] = params.vmax_xy;
  if (gimbal) {
    p.lo[2] = -params.vmax_gimbal;
    p.hi[2] = params.vmax_gimbal;
    p.lo[3] = -params.vmax_gimbal;
    p.hi[3] = params.vmax_gimbal;
  }

  // coverage row: xi1'u - w + xi2 >= 0
  QpRow cov;
  cov.a = Eigen::VectorXd::Zero(nz);
  for (Eigen::Index k = 0; k < nu; ++k) cov.a[k] = terms.xi1[k];
  cov.a[nu] = -1.0;
  cov.c = terms.xi2;
  p.rows.push_back(cov);
  if (gimbal) {
    // gimbal row: chi1'u + chi2 >= 0
    QpRow gim;
    gim.a = Eigen::VectorXd::Zero(nz);
    for (Eigen::Index k = 0; k < 4; ++k) gim.a[k] = terms.chi1[k];
    gim.c = terms.chi2;
    p.rows.push_back(gim);
  }

  const QpSolution sol = solve(p);

  ControlResult out;
  for (Eigen::Index k = 0; k < nu; ++k) out.u[k] = sol.z[k];
  out.w = sol.z[nu];
  out.status = sol.status;
  out.kkt_residual = sol.kkt_residual;
  out.iterations = sol.iterations;
  out.degenerate = sol.degenerate;
  out.active = sol.active;
  out.slack_violating = out.w < -1e-12;
  const double btol = 1e-9;
  out.box_active = std::abs(out.u[0]) >= params.vmax_xy - btol ||
                   std::abs(out.u[1]) >= params.vmax_xy - btol;
  if (gimbal) {
    out.box_active = out.box_active ||
                     std::abs(out.u[2]) >= params.vmax_gimbal - btol ||
                     std::abs(out.u[3]) >= params.vmax_gimbal - btol;
  }
  return out;
}

}  // namespace angleaware
