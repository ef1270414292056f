// Camera/viewpoint geometry and the per-(drone, cell) performance function.
//
// Conventions:
//   - Drone state p = [x y phi_h phi_v], fixed altitude z_c, body frame = world
//     frame (yaw is folded into the gimbal horizontal angle).
//   - Optical axis eta = [cos(phi_h)cos(phi_v), sin(phi_h)cos(phi_v), -sin(phi_v)]:
//     phi_v = pi/2 points straight down at the target field below.
//   - A cell's view direction points from the cell toward the ideal observer;
//     the angular-match score h2 therefore compares it against the cell->drone
//     unit vector.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace angleaware {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Degenerate drone-over-cell pairs (range below this) score perf = 0.
inline constexpr double kDegenerateRange = 1e-9;
// arccos arguments are clamped to +-(1 - kAcosValueEps) for values and to
// +-(1 - kAcosGradEps) inside the gradient chain, where 1/sqrt(1-c^2) blows up.
inline constexpr double kAcosValueEps = 1e-12;
inline constexpr double kAcosGradEps = 1e-7;
// h1 surrogate for degenerate pairs: large enough that exp(-h1/(2 s1^2))
// underflows to exactly 0 for any sane sigma1.
inline constexpr double kH1DegenerateSurrogate = 1e9;

inline double wrap_two_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

inline double wrap_pi(double a) {
  a = wrap_two_pi(a + kPi);
  return a - kPi;
}

struct DroneState {
  double x = 0.0;             // [m]
  double y = 0.0;             // [m]
  double phi_h = 0.0;         // gimbal horizontal angle, stored in [0, 2pi)
  double phi_v = 0.5 * kPi;   // gimbal vertical angle, (0, pi/2]
  double z_c = 1.0;           // fixed flight altitude [m]

  DroneState() = default;
  DroneState(double x_, double y_, double phi_h_, double phi_v_, double z_c_)
      : x(x_), y(y_), phi_h(wrap_two_pi(phi_h_)), phi_v(phi_v_), z_c(z_c_) {}
};

struct Cell {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta_h = 0.0;       // [-pi, pi)
  double theta_v = 0.5 * kPi; // (0, pi/2]
  std::int64_t index = 0;
};

enum class H1Mode {
  Literal,  // (fov - angle)^2, maximal response on the FOV boundary ring
  Clamped,  // max(0, angle - fov)^2, flat response inside the FOV
};

struct CameraParams {
  double fov = kPi / 6.0;  // half-angle of the field of view, (0, pi/2)
  double sigma1 = 0.13;
  double sigma2 = 0.18;
  H1Mode h1_mode = H1Mode::Literal;

  bool valid() const {
    return fov > 0.0 && fov < 0.5 * kPi && sigma1 > 0.0 && sigma2 > 0.0;
  }
};

// ---------------------------------------------------------------------------
// Hot-path building blocks. The engine evaluates millions of (drone, cell)
// pairs per step; everything below is allocation-free and inlineable.
// ---------------------------------------------------------------------------

// Per-drone per-step precomputed terms.
struct DroneFrame {
  double x, y, z_c;
  double eta_x, eta_y, eta_z;
  double sin_h, cos_h, sin_v, cos_v;

  static DroneFrame from(const DroneState& s) {
    DroneFrame f;
    f.x = s.x;
    f.y = s.y;
    f.z_c = s.z_c;
    f.sin_h = std::sin(s.phi_h);
    f.cos_h = std::cos(s.phi_h);
    f.sin_v = std::sin(s.phi_v);
    f.cos_v = std::cos(s.phi_v);
    f.eta_x = f.cos_h * f.cos_v;
    f.eta_y = f.sin_h * f.cos_v;
    f.eta_z = -f.sin_v;
    return f;
  }
};

struct CameraDerived {
  double fov;
  double inv_two_s1sq;
  double inv_two_s2sq;
  bool clamped;

  static CameraDerived from(const CameraParams& c) {
    return {c.fov, 0.5 / (c.sigma1 * c.sigma1), 0.5 / (c.sigma2 * c.sigma2),
            c.h1_mode == H1Mode::Clamped};
  }
};

// perf for one (drone, cell) pair; (vx, vy, vz) is the cell's unit view
// direction. Degenerate pairs score 0.
inline double perf_value(const DroneFrame& f, double cx, double cy, double cz,
                         double vx, double vy, double vz,
                         const CameraDerived& cam) {
  const double dx = cx - f.x;
  const double dy = cy - f.y;
  const double dz = cz - f.z_c;
  const double r2 = dx * dx + dy * dy + dz * dz;
  if (r2 < kDegenerateRange * kDegenerateRange) return 0.0;
  const double rinv = 1.0 / std::sqrt(r2);
  const double hx = dx * rinv, hy = dy * rinv, hz = dz * rinv;

  const double lim = 1.0 - kAcosValueEps;
  double c1 = f.eta_x * hx + f.eta_y * hy + f.eta_z * hz;
  c1 = std::clamp(c1, -lim, lim);
  const double a1 = std::acos(c1);
  const double g1 = cam.clamped ? std::max(0.0, a1 - cam.fov) : (cam.fov - a1);

  double c2 = -(vx * hx + vy * hy + vz * hz);
  c2 = std::clamp(c2, -lim, lim);
  const double a2 = std::acos(c2);

  return std::exp(-(g1 * g1) * cam.inv_two_s1sq -
                  (a2 * a2) * cam.inv_two_s2sq);
}

struct PerfGrad {
  double value = 0.0;
  double d[4] = {0.0, 0.0, 0.0, 0.0};  // d/dx, d/dy, d/dphi_h, d/dphi_v
  bool guarded = false;                // arccos argument hit the guard band
};

// perf and its analytic gradient with respect to (x, y, phi_h, phi_v).
// Inside the guard band |arg| > 1 - kAcosGradEps the chain is evaluated at the
// clamped argument so the result stays finite.
inline PerfGrad perf_with_gradient(const DroneFrame& f, double cx, double cy,
                                   double cz, double vx, double vy, double vz,
                                   const CameraDerived& cam) {
  PerfGrad out;
  const double dx = cx - f.x;
  const double dy = cy - f.y;
  const double dz = cz - f.z_c;
  const double r2 = dx * dx + dy * dy + dz * dz;
  if (r2 < kDegenerateRange * kDegenerateRange) {
    out.guarded = true;
    return out;  // perf == 0, zero gradient
  }
  const double rinv = 1.0 / std::sqrt(r2);
  const double hx = dx * rinv, hy = dy * rinv, hz = dz * rinv;

  const double vlim = 1.0 - kAcosValueEps;
  const double glim = 1.0 - kAcosGradEps;

  const double c1_raw = f.eta_x * hx + f.eta_y * hy + f.eta_z * hz;
  const double c2_raw = -(vx * hx + vy * hy + vz * hz);
  out.guarded = std::abs(c1_raw) > glim || std::abs(c2_raw) > glim;

  // value path
  const double c1v = std::clamp(c1_raw, -vlim, vlim);
  const double c2v = std::clamp(c2_raw, -vlim, vlim);
  const double a1v = std::acos(c1v);
  const double g1v = cam.clamped ? std::max(0.0, a1v - cam.fov) : (cam.fov - a1v);
  const double a2v = std::acos(c2v);
  out.value = std::exp(-(g1v * g1v) * cam.inv_two_s1sq -
                       (a2v * a2v) * cam.inv_two_s2sq);

  // gradient path, guarded arguments
  const double c1 = std::clamp(c1_raw, -glim, glim);
  const double c2 = std::clamp(c2_raw, -glim, glim);
  const double a1 = std::acos(c1);
  const double a2 = std::acos(c2);
  const double g1 = cam.clamped ? std::max(0.0, a1 - cam.fov) : (cam.fov - a1);

  // dh1/dc1 = 2 g1 dg1/da1 da1/dc1, with da1/dc1 = -1/sqrt(1-c1^2)
  const double inv_s1 = 1.0 / std::sqrt(1.0 - c1 * c1);
  double dh1_dc1;
  if (cam.clamped) {
    dh1_dc1 = (a1 > cam.fov) ? 2.0 * g1 * (-inv_s1) : 0.0;
  } else {
    dh1_dc1 = 2.0 * g1 * inv_s1;  // (-1) * (-1/sqrt) = +1/sqrt
  }
  const double inv_s2 = 1.0 / std::sqrt(1.0 - c2 * c2);
  const double dh2_dc2 = 2.0 * a2 * (-inv_s2);

  // dc1/dp and dc2/dp
  const double dc1_dx = rinv * (-f.eta_x + c1 * hx);
  const double dc1_dy = rinv * (-f.eta_y + c1 * hy);
  const double dc1_dphih = (-f.sin_h * f.cos_v) * hx + (f.cos_h * f.cos_v) * hy;
  const double dc1_dphiv =
      (-f.cos_h * f.sin_v) * hx + (-f.sin_h * f.sin_v) * hy + (-f.cos_v) * hz;
  const double dc2_dx = rinv * (vx + c2 * hx);
  const double dc2_dy = rinv * (vy + c2 * hy);

  const double k1 = -cam.inv_two_s1sq * dh1_dc1;
  const double k2 = -cam.inv_two_s2sq * dh2_dc2;
  out.d[0] = out.value * (k1 * dc1_dx + k2 * dc2_dx);
  out.d[1] = out.value * (k1 * dc1_dy + k2 * dc2_dy);
  out.d[2] = out.value * (k1 * dc1_dphih);
  out.d[3] = out.value * (k1 * dc1_dphiv);
  return out;
}

// Boolean covered test: cell inside the FOV cone and viewing-direction
// mismatch within the threshold (both inclusive).
inline bool covered_pair(const DroneFrame& f, double cx, double cy, double cz,
                         double vx, double vy, double vz, double cos_fov,
                         double cos_threshold) {
  const double dx = cx - f.x;
  const double dy = cy - f.y;
  const double dz = cz - f.z_c;
  const double r2 = dx * dx + dy * dy + dz * dz;
  if (r2 < kDegenerateRange * kDegenerateRange) return false;
  const double rinv = 1.0 / std::sqrt(r2);
  const double c1 = (f.eta_x * dx + f.eta_y * dy + f.eta_z * dz) * rinv;
  const double c2 = -(vx * dx + vy * dy + vz * dz) * rinv;
  return c1 >= cos_fov && c2 >= cos_threshold;
}

// ---------------------------------------------------------------------------
// Derived geometric quantities on the domain types.
// ---------------------------------------------------------------------------

Eigen::Vector3d optical_axis(const DroneState& s);
Eigen::Vector3d view_direction(const Cell& q);

struct CellVector {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  double norm = 0.0;
  bool degenerate = false;
};
CellVector drone_to_cell_vector(const DroneState& s, const Cell& q);

double h1(const DroneState& s, const Cell& q, const CameraParams& c);
double h2(const DroneState& s, const Cell& q);
double perf(const DroneState& s, const Cell& q, const CameraParams& c);

struct PerfGradient {
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
  bool guarded = false;
};
PerfGradient perf_gradient(const DroneState& s, const Cell& q,
                           const CameraParams& c);

}  // namespace angleaware
