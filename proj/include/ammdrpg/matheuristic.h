#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ammdrpg/convex_sub.h"
#include "ammdrpg/instance.h"
#include "ammdrpg/model_ir.h"
#include "ammdrpg/solution.h"

namespace ammdrpg {

// Within-graph drone route with its first entry and last exit points.
struct DroneTour {
  int graph = 0;
  std::vector<EdgeVisit> visits;  // drone order
  int entry_edge = 0;
  int exit_edge = 0;
  Point entry;
  Point exit;
  double interior_length = 0.0;  // drone travel from entry to exit
};

DroneTour step1_drone_tour(const TargetGraph& g, Point anchor, VisitMode mode);

struct Clustering {
  std::vector<std::vector<int>> clusters;  // graph ids, ascending within a cluster
  std::vector<Point> meeting;
  std::vector<Point> reference;
};

// Worst drone flight time of the member tours when launched and retrieved at p.
double cluster_time(const Instance& in, const std::map<int, DroneTour>& tours, const std::vector<int>& members,
                    Point p);

Clustering step2_cluster(const Instance& in, const std::map<int, DroneTour>& tours, std::uint64_t seed, int maxit,
                         bool strict_fleet = false);

Clustering step3_reference_points(Clustering c, const Instance& in, const std::map<int, DroneTour>& tours);

struct TspPath {
  std::vector<int> order;  // indices into the point list
  double length = 0.0;
};

// Shortest orig -> points -> dest path; exact up to 12 points.
TspPath step4_tsp(const std::vector<Point>& points, Point orig, Point dest);

struct MatheuristicParams {
  int maxseed = 10;
  std::uint64_t first_seed = 1;  // seeds first_seed .. first_seed + maxseed - 1
  int maxit = 50;
  double tol = 1e-6;
  bool strict_fleet = false;  // merged clusters strictly smaller than the fleet
  SyncMode mode = SyncMode::Sync;
};

struct MatheuristicResult {
  Solution solution;
  FixedCombinatorics skeleton;
  Clustering clustering;  // winning seed, clusters in visiting order
  std::uint64_t seed = 0;
  double tsp_length = 0.0;
};

MatheuristicResult run_matheuristic(const Instance& in, const MatheuristicParams& params = {});

// Warm start v1: every binary and integer variable of the model by name.
std::string save_warmstart(const Instance& in, const FixedCombinatorics& f, const Solution& s,
                           const ModelOptions& options = {});
std::map<std::string, long> load_warmstart(std::string_view text);

}  // namespace ammdrpg
