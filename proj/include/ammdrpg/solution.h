#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ammdrpg/geometry.h"

namespace ammdrpg {

enum class SyncMode { Sync, Async };

std::string_view to_string(SyncMode m);

// One traversed edge. The drone enters at B + rho (C - B) and leaves at
// B + lambda (C - B); forward means it moves from B towards C (lambda >= rho).
struct EdgeVisit {
  int edge = 0;
  double rho = 0.0;
  double lambda = 0.0;
  bool forward = true;
};

struct Operation {
  int graph = 0;
  int drone = 1;           // 1-based
  int launch_stage = 1;    // 1-based
  int retrieve_stage = 1;  // equals launch_stage in sync mode
  std::vector<EdgeVisit> visits;
};

struct Stage {
  Point launch;
  Point retrieve;
  double transit = 0.0;    // mothership leg from the previous retrieve point (or origin) to launch
  double operation = 0.0;  // mothership leg from launch to retrieve
};

struct Solution {
  SyncMode mode = SyncMode::Sync;
  Point origin;
  Point destination;
  std::vector<Stage> stages;
  double final_transit = 0.0;  // last retrieve point (or origin) to destination
  std::vector<Operation> operations;
  double objective = 0.0;
  std::uint64_t instance_fingerprint = 0;

  // Sum of every stored mothership leg.
  double recomputed_objective() const;
};

// Solution file format v1.
std::string save_solution(const Solution& s);
Solution load_solution(std::string_view text);

}  // namespace ammdrpg
