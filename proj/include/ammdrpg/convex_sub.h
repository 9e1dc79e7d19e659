#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "ammdrpg/instance.h"
#include "ammdrpg/solution.h"
#include "ammdrpg/validate.h"

namespace ammdrpg {

struct RouteStep {
  int edge = 0;
  bool forward = true;  // entry = 1: traverse from B towards C

  friend bool operator==(const RouteStep&, const RouteStep&) = default;
};

struct FixedOperation {
  int graph = 0;
  int drone = 1;
  int launch_stage = 1;
  int retrieve_stage = 1;
  std::vector<RouteStep> route;  // visited edges in drone order

  friend bool operator==(const FixedOperation&, const FixedOperation&) = default;
};

// Every binary decision of the formulation, stored as operations. The binary
// maps below are derived views.
struct FixedCombinatorics {
  int n_stages = 0;
  std::vector<FixedOperation> operations;

  friend bool operator==(const FixedCombinatorics&, const FixedCombinatorics&) = default;
};

// (graph id, edge id, stage, drone) -> 1 for every nonzero u or v.
using StageKey = std::tuple<int, int, int, int>;
// (graph id, edge id, next edge id) -> 1 for every nonzero z.
using PairKey = std::tuple<int, int, int>;
// (graph id, edge id).
using EdgeKey = std::pair<int, int>;

struct BinaryView {
  std::map<StageKey, int> u;
  std::map<StageKey, int> v;
  std::map<PairKey, int> z;
  std::map<EdgeKey, int> mu;
  std::map<EdgeKey, int> entry;
  std::map<EdgeKey, int> order;  // position of the edge in its route (MTZ s value)
};

BinaryView binary_view(const FixedCombinatorics& f);

// Throws std::invalid_argument when f breaks the assignment rules for `mode`.
void check_combinatorics(const Instance& instance, const FixedCombinatorics& f, SyncMode mode);

struct SolverOptions {
  int max_newton = 4000;
  bool raw_endurance_cap = false;
  // Alternative starting point for restart studies: 0 uses the deterministic
  // straight-line start, any other value seeds a random start.
  std::uint64_t random_start = 0;
  bool keep_trace = false;
};

struct MeritSample {
  int outer;      // barrier weight index
  double merit;   // barrier function value at the accepted iterate
  double objective;
};

struct ContinuousSolution {
  Solution solution;
  double gap_bound = 0.0;  // duality-gap bound of the final barrier iterate
  int newton_iterations = 0;
  std::vector<MeritSample> trace;
  ValidationReport residuals;
};

// Optimises all continuous variables under fixed binaries. Throws
// InfeasibleError (with the graph id when attributable) or NonConvergedError.
ContinuousSolution solve_fixed(const Instance& instance, const FixedCombinatorics& f, SyncMode mode,
                               double tol, const SolverOptions& options = {});

ValidationReport feasibility_report(const Instance& instance, const FixedCombinatorics& f,
                                    const ContinuousSolution& sol, double tol);

}  // namespace ammdrpg
