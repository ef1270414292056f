// Discretized 5D virtual space and the importance index vector.
//
// Cell ordering is row-major with x slowest and theta_v fastest:
//   j = (((ix*ny + iy)*nz + iz)*nth + ith)*ntv + itv
// so indices are stable across runs and platforms, and all angular samples of
// one spatial position are contiguous.
#pragma once

#include "angleaware/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace angleaware {

struct GridSpec {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  double z_min = 0.0, z_max = 0.5;
  double th_min = -kPi, th_max = kPi;        // theta_h
  double tv_min = kPi / 6.0, tv_max = kPi / 2.0;  // theta_v
  double res_x = 0.1, res_y = 0.1, res_z = 0.1;
  double res_th = kPi / 15.0, res_tv = kPi / 15.0;

  // Derived by derive(); zero until then.
  std::int64_t nx = 0, ny = 0, nz = 0, nth = 0, ntv = 0;
  std::int64_t m = 0;

  // Fills the per-axis counts and m. Returns false if a bound pair is
  // inverted, a resolution is nonpositive, or a resolution exceeds its span.
  bool derive();

  Cell cell_at(std::int64_t j) const;
};

std::vector<Cell> build_grid(const GridSpec& spec);

struct ImportanceField {
  std::vector<double> psi;
  double psi0 = 1.0;
};

ImportanceField make_field(std::int64_t m, double psi0 = 1.0);

// Explicit-Euler step of the decay law: psi_j *= 1 - delta*hmax_j*dt, floored
// at 0. Requires delta*dt < 1 so the multiplier stays positive.
void update_importance(ImportanceField& field, std::span<const double> hmax,
                       double delta, double dt);

// Sum of all psi_j in fixed serial order.
double objective(const ImportanceField& field);

// psi averaged over the two angular axes; output length nx*ny*nz, ordered
// x slowest, z fastest.
std::vector<double> angular_mean(const ImportanceField& field,
                                 const GridSpec& spec);

}  // namespace angleaware
