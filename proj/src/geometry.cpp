#include "angleaware/geometry.hpp"

namespace angleaware {

Eigen::Vector3d optical_axis(const DroneState& s) {
  const DroneFrame f = DroneFrame::from(s);
  return {f.eta_x, f.eta_y, f.eta_z};
}

Eigen::Vector3d view_direction(const Cell& q) {
  const double ch = std::cos(q.theta_h), sh = std::sin(q.theta_h);
  const double cv = std::cos(q.theta_v), sv = std::sin(q.theta_v);
  return {ch * cv, sh * cv, sv};
}

CellVector drone_to_cell_vector(const DroneState& s, const Cell& q) {
  CellVector out;
  out.v = Eigen::Vector3d(q.x - s.x, q.y - s.y, q.z - s.z_c);
  out.norm = out.v.norm();
  out.degenerate = out.norm < kDegenerateRange;
  return out;
}

double h1(const DroneState& s, const Cell& q, const CameraParams& c) {
  const CellVector d = drone_to_cell_vector(s, q);
  if (d.degenerate) return kH1DegenerateSurrogate;
  const double lim = 1.0 - kAcosValueEps;
  const double cosang =
      std::clamp(optical_axis(s).dot(d.v) / d.norm, -lim, lim);
  const double ang = std::acos(cosang);
  if (c.h1_mode == H1Mode::Clamped) {
    const double e = std::max(0.0, ang - c.fov);
    return e * e;
  }
  const double e = c.fov - ang;
  return e * e;
}

double h2(const DroneState& s, const Cell& q) {
  const CellVector d = drone_to_cell_vector(s, q);
  if (d.degenerate) return 0.0;
  const double lim = 1.0 - kAcosValueEps;
  // cell -> drone unit vector is -v / |v|
  const double cosang =
      std::clamp(view_direction(q).dot(-d.v) / d.norm, -lim, lim);
  const double ang = std::acos(cosang);
  return ang * ang;
}

double perf(const DroneState& s, const Cell& q, const CameraParams& c) {
  const Eigen::Vector3d v = view_direction(q);
  return perf_value(DroneFrame::from(s), q.x, q.y, q.z, v.x(), v.y(), v.z(),
                    CameraDerived::from(c));
}

PerfGradient perf_gradient(const DroneState& s, const Cell& q,
                           const CameraParams& c) {
  const Eigen::Vector3d v = view_direction(q);
  const PerfGrad pg = perf_with_gradient(DroneFrame::from(s), q.x, q.y, q.z,
                                         v.x(), v.y(), v.z(),
                                         CameraDerived::from(c));
  PerfGradient out;
  out.g = Eigen::Vector4d(pg.d[0], pg.d[1], pg.d[2], pg.d[3]);
  out.guarded = pg.guarded;
  return out;
}

}  // namespace angleaware
