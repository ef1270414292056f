#include "angleaware/partition.hpp"

#include <stdexcept>

namespace angleaware {

Partition assign_cells(const std::vector<DroneState>& states,
                       const std::vector<Cell>& cells, const CameraParams& c) {
  const int n = static_cast<int>(states.size());
  if (n < 1) throw std::invalid_argument("assign_cells: need n >= 1");

  std::vector<DroneFrame> frames;
  frames.reserve(states.size());
  for (const DroneState& s : states) frames.push_back(DroneFrame::from(s));
  const CameraDerived cam = CameraDerived::from(c);

  Partition part;
  part.owner.resize(cells.size());
  part.cells.resize(states.size());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const Cell& q = cells[j];
    const Eigen::Vector3d v = view_direction(q);
    int best = 0;
    double best_perf = -1.0;
    for (int i = 0; i < n; ++i) {
      // strict > keeps the lowest index on ties
      const double p = perf_value(frames[static_cast<std::size_t>(i)], q.x,
                                  q.y, q.z, v.x(), v.y(), v.z(), cam);
      if (p > best_perf) {
        best_perf = p;
        best = i;
      }
    }
    part.owner[j] = best;
    part.cells[static_cast<std::size_t>(best)].push_back(
        static_cast<std::int64_t>(j));
  }
  return part;
}

}  // namespace angleaware
