// Voronoi-like partition: each cell is owned by the drone that currently
// observes it best, ties broken by lowest drone index.
#pragma once

#include "angleaware/geometry.hpp"

#include <cstdint>
#include <vector>

namespace angleaware {

struct Partition {
  std::vector<int> owner;                        // length m
  std::vector<std::vector<std::int64_t>> cells;  // per-drone owned cell ids
};

Partition assign_cells(const std::vector<DroneState>& states,
                       const std::vector<Cell>& cells, const CameraParams& c);

}  // namespace angleaware
