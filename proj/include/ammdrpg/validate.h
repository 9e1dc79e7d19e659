#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ammdrpg/instance.h"
#include "ammdrpg/solution.h"

namespace ammdrpg {

enum class Family { Assignment, Subtour, Coverage, Distances, Dcw, Capacity, Boundary, Objective };
inline constexpr int kFamilyCount = 8;

std::string_view to_string(Family f);

struct Violation {
  Family family;
  std::string location;
  double residual;
};

struct ValidationReport {
  double tol = 0.0;
  std::vector<double> max_residual = std::vector<double>(kFamilyCount, 0.0);
  std::vector<Violation> violations;  // every check whose residual exceeds tol
  // DCW measured against the inbound transit leg instead of the launch-to-retrieve leg.
  // Diagnostic only, never part of the verdict.
  double dcw_transit_residual = 0.0;

  double residual(Family f) const { return max_residual[static_cast<int>(f)]; }
  bool pass() const;
};

struct CheckOptions {
  // Capacity as operation distance <= endurance instead of <= v_m * endurance.
  bool raw_endurance_cap = false;
  // At most one launch and one retrieve per stage over the whole fleet.
  bool fleet_stage_cap = false;
};

// Recomputes every constraint family from raw coordinates. `s.mode` selects the
// synchronous or asynchronous rules.
ValidationReport check_solution(const Instance& instance, const Solution& s, double tol,
                                const CheckOptions& options = {});

std::string report_table(const ValidationReport& r);
std::string save_report(const ValidationReport& r);
ValidationReport load_report(std::string_view text);

// Looks for a single launch/retrieve pair serving both targets P1, P2 in one
// synchronous stage. Returns a witness only after checking all four conditions
// to 1e-9.
std::optional<std::pair<Point, Point>> check_sync_reducible(Point p1, Point p2, Point xl1, Point xl2,
                                                            Point xr1, Point xr2, double v_m,
                                                            double v_d, double endurance);

// The four residuals (<= 0 means satisfied) used by check_sync_reducible.
std::vector<double> sync_reducible_residuals(Point xl, Point xr, Point p1, Point p2, Point xl1,
                                             Point xl2, Point xr1, Point xr2, double v_m, double v_d,
                                             double endurance);

}  // namespace ammdrpg
