#include "angleaware/field.hpp"

#include <cmath>
#include <stdexcept>

namespace angleaware {

namespace {

// floor(span/res) with a relative guard so spans that are exact multiples of
// the resolution up to rounding (2.0 / 0.02, 2*pi / (pi/30), ...) are not
// undercounted.
std::int64_t axis_count(double lo, double hi, double res) {
  if (!(hi > lo) || !(res > 0.0)) return 0;
  return static_cast<std::int64_t>(std::floor((hi - lo) / res + 1e-9));
}

}  // namespace

bool GridSpec::derive() {
  nx = axis_count(x_min, x_max, res_x);
  ny = axis_count(y_min, y_max, res_y);
  nz = axis_count(z_min, z_max, res_z);
  nth = axis_count(th_min, th_max, res_th);
  ntv = axis_count(tv_min, tv_max, res_tv);
  if (nx < 1 || ny < 1 || nz < 1 || nth < 1 || ntv < 1) {
    m = 0;
    return false;
  }
  m = nx * ny * nz * nth * ntv;
  return true;
}

Cell GridSpec::cell_at(std::int64_t j) const {
  Cell q;
  q.index = j;
  const std::int64_t itv = j % ntv;
  j /= ntv;
  const std::int64_t ith = j % nth;
  j /= nth;
  const std::int64_t iz = j % nz;
  j /= nz;
  const std::int64_t iy = j % ny;
  const std::int64_t ix = j / ny;
  q.x = x_min + (static_cast<double>(ix) + 0.5) * res_x;
  q.y = y_min + (static_cast<double>(iy) + 0.5) * res_y;
  q.z = z_min + (static_cast<double>(iz) + 0.5) * res_z;
  q.theta_h = th_min + (static_cast<double>(ith) + 0.5) * res_th;
  q.theta_v = tv_min + (static_cast<double>(itv) + 0.5) * res_tv;
  return q;
}

std::vector<Cell> build_grid(const GridSpec& spec) {
  GridSpec s = spec;
  if (!s.derive()) {
    throw std::invalid_argument(
        "GridSpec invalid: need min < max and 0 < resolution <= span per axis");
  }
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(s.m));
  for (std::int64_t j = 0; j < s.m; ++j) cells.push_back(s.cell_at(j));
  return cells;
}

ImportanceField make_field(std::int64_t m, double psi0) {
  if (m < 1 || psi0 < 0.0) {
    throw std::invalid_argument("ImportanceField: need m >= 1 and psi0 >= 0");
  }
  ImportanceField f;
  f.psi0 = psi0;
  f.psi.assign(static_cast<std::size_t>(m), psi0);
  return f;
}

void update_importance(ImportanceField& field, std::span<const double> hmax,
                       double delta, double dt) {
  if (!(delta > 0.0) || !(dt > 0.0) || delta * dt >= 1.0) {
    throw std::invalid_argument("update_importance: need delta*dt in (0, 1)");
  }
  if (hmax.size() != field.psi.size()) {
    throw std::invalid_argument("update_importance: hmax length mismatch");
  }
  const double k = delta * dt;
  for (std::size_t j = 0; j < field.psi.size(); ++j) {
    double v = field.psi[j] * (1.0 - k * hmax[j]);
    field.psi[j] = v > 0.0 ? v : 0.0;
  }
}

double objective(const ImportanceField& field) {
  double s = 0.0;
  for (double v : field.psi) s += v;
  return s;
}

std::vector<double> angular_mean(const ImportanceField& field,
                                 const GridSpec& spec) {
  const std::int64_t block = spec.nth * spec.ntv;
  const std::int64_t nspatial = spec.nx * spec.ny * spec.nz;
  if (block < 1 || static_cast<std::int64_t>(field.psi.size()) != spec.m) {
    throw std::invalid_argument("angular_mean: field/spec size mismatch");
  }
  std::vector<double> out(static_cast<std::size_t>(nspatial));
  const double inv = 1.0 / static_cast<double>(block);
  for (std::int64_t s = 0; s < nspatial; ++s) {
    double acc = 0.0;
    const double* p = field.psi.data() + s * block;
    for (std::int64_t k = 0; k < block; ++k) acc += p[k];
    out[static_cast<std::size_t>(s)] = acc * inv;
  }
  return out;
}

}  // namespace angleaware
