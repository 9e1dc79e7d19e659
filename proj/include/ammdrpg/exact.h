#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ammdrpg/convex_sub.h"

namespace ammdrpg {

struct ExactLimits {
  int max_graphs = 2;
  int max_edges = 3;
  int max_drones = 2;
};

// Every admissible route of one graph: edge subsets compatible with the
// coverage mode, in every order and with every entry direction.
std::vector<std::vector<RouteStep>> enumerate_routes(const TargetGraph& g, VisitMode mode);

// Stage intervals per graph (index-aligned with instance.graphs) with drones
// assigned canonically: graphs sorted by (launch stage, id) take the lowest
// free drone.
struct StageStructure {
  int n_stages = 0;
  std::vector<int> launch;
  std::vector<int> retrieve;
  std::vector<int> drone;
};
std::vector<StageStructure> enumerate_structures(const Instance& instance, SyncMode mode);

// Calls `visit` for every skeleton in a fixed order: structures outermost,
// then route choices with the last graph varying fastest. Throws
// LimitsExceededError when the instance is outside `limits`.
void enumerate_skeletons(const Instance& instance, const ExactLimits& limits, SyncMode mode,
                         const std::function<void(const FixedCombinatorics&)>& visit);
std::vector<FixedCombinatorics> enumerate_skeletons(const Instance& instance, const ExactLimits& limits,
                                                    SyncMode mode);

struct ExactResult {
  Solution solution;
  FixedCombinatorics skeleton;
  std::size_t skeletons = 0;   // enumerated
  std::size_t solved = 0;      // handed to the continuous solver
  std::size_t infeasible = 0;  // rejected by the continuous solver or the bound table
  std::size_t failed = 0;      // solver did not converge
};

// Minimum over all skeletons. Skeletons are visited in increasing order of a
// lower bound (the best single-graph plan of any of their graphs) and the
// search stops once that bound exceeds the incumbent. Ties keep the skeleton
// that comes first in enumeration order.
ExactResult solve_exact(const Instance& instance, SyncMode mode, const ExactLimits& limits, double tol);

}  // namespace ammdrpg
