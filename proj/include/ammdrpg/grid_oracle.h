#pragma once

#include "ammdrpg/instance.h"

namespace ammdrpg {

struct OracleOptions {
  int lattice = 50;      // entry/exit parameters on multiples of 1/lattice
  int coarse_cells = 24; // cells along the longer side of the first exhaustive grid
  int window = 4;        // refinement window half-width, in grid steps
};

// Brute-force synchronous optimum estimate that shares nothing with the model
// or the convex solver. Launch and retrieve points are searched on grids over
// the bounding box of all instance points: an exhaustive coarse pass, then
// windowed passes with the step halved until it is at most `resolution`.
// Returns +inf when no discretised plan is feasible. Limits: 2 graphs,
// 3 edges per graph (2 in whole-graph mode), 2 drones.
double grid_oracle(const Instance& instance, double resolution, const OracleOptions& options = {});

}  // namespace ammdrpg
