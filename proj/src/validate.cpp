#include "ammdrpg/validate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "ammdrpg/error.h"
#include "ammdrpg/text.h"

namespace ammdrpg {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Assignment: return "assignment";
    case Family::Subtour: return "subtour";
    case Family::Coverage: return "coverage";
    case Family::Distances: return "distances";
    case Family::Dcw: return "dcw";
    case Family::Capacity: return "capacity";
    case Family::Boundary: return "boundary";
    case Family::Objective: return "objective";
  }
  return "unknown";
}

bool ValidationReport::pass() const {
  return std::all_of(max_residual.begin(), max_residual.end(), [&](double r) { return r <= tol; });
}

namespace {

class Recorder {
 public:
  explicit Recorder(ValidationReport& r) : r_(r) {}

  void add(Family f, const std::string& where, double residual) {
    if (std::isnan(residual)) {
      residual = INFINITY;
    }
    auto& m = r_.max_residual[static_cast<int>(f)];
    m = std::max(m, residual);
    if (residual > r_.tol) {
      r_.violations.push_back({f, where, residual});
    }
  }

 private:
  ValidationReport& r_;
};

std::string op_path(const Operation& op) { return "operation[graph=" + std::to_string(op.graph) + "]"; }

// Drone path length xL -> R1 -> L1 -> ... -> Lk -> xR.
double drone_length(const TargetGraph& g, const Operation& op, Point from, Point to) {
  double len = 0.0;
  Point at = from;
  for (const auto& v : op.visits) {
    const auto& seg = g.edges[static_cast<std::size_t>(v.edge)].segment;
    const Point entry = lerp(seg, v.rho);
    const Point exit = lerp(seg, v.lambda);
    len += dist(at, entry) + std::abs(v.lambda - v.rho) * edge_length(seg);
    at = exit;
  }
  return len + dist(at, to);
}

}  // namespace

ValidationReport check_solution(const Instance& in, const Solution& s, double tol,
                                const CheckOptions& options) {
  ValidationReport report;
  report.tol = tol;
  Recorder rec(report);
  const int T = static_cast<int>(s.stages.size());
  const bool sync = s.mode == SyncMode::Sync;

  // Boundary.
  rec.add(Family::Boundary, "origin", dist(s.origin, in.origin));
  rec.add(Family::Boundary, "destination", dist(s.destination, in.destination));

  // Mothership legs.
  Point prev = s.origin;
  for (int t = 0; t < T; ++t) {
    const auto& st = s.stages[static_cast<std::size_t>(t)];
    const std::string where = "stage[" + std::to_string(t + 1) + "]";
    rec.add(Family::Distances, where + ".transit", dist(prev, st.launch) - st.transit);
    rec.add(Family::Distances, where + ".operation", dist(st.launch, st.retrieve) - st.operation);
    prev = st.retrieve;
  }
  rec.add(Family::Distances, "final_transit", dist(prev, s.destination) - s.final_transit);
  rec.add(Family::Objective, "objective", std::abs(s.objective - s.recomputed_objective()));

  // Capacity.
  const double cap = options.raw_endurance_cap ? in.endurance : in.v_m * in.endurance;
  for (int t = 0; t < T; ++t) {
    rec.add(Family::Capacity, "stage[" + std::to_string(t + 1) + "]",
            s.stages[static_cast<std::size_t>(t)].operation - cap);
  }

  // Assignment.
  if (T > static_cast<int>(in.graphs.size())) {
    rec.add(Family::Assignment, "stages", T - static_cast<double>(in.graphs.size()));
  }
  std::map<int, int> served;
  for (const auto& g : in.graphs) served[g.id] = 0;
  std::map<std::pair<int, int>, int> launches;
  std::map<std::pair<int, int>, int> retrieves;
  std::vector<const Operation*> valid_ops;
  for (const auto& op : s.operations) {
    const std::string where = op_path(op);
    bool ok = true;
    auto it = served.find(op.graph);
    if (it == served.end()) {
      rec.add(Family::Assignment, where + ".graph", 1.0);
      ok = false;
    } else {
      ++it->second;
    }
    if (op.drone < 1 || op.drone > in.n_drones) {
      rec.add(Family::Assignment, where + ".drone", 1.0);
      ok = false;
    }
    if (op.launch_stage < 1 || op.launch_stage > T || op.retrieve_stage < 1 || op.retrieve_stage > T) {
      rec.add(Family::Assignment, where + ".stage", 1.0);
      ok = false;
    } else if (sync && op.launch_stage != op.retrieve_stage) {
      rec.add(Family::Assignment, where + ".retrieve_stage", 1.0);
    } else if (op.retrieve_stage < op.launch_stage) {
      rec.add(Family::Assignment, where + ".retrieve_stage", 1.0);
      ok = false;
    }
    const int dkey = options.fleet_stage_cap ? 0 : op.drone;
    ++launches[{op.launch_stage, dkey}];
    ++retrieves[{op.retrieve_stage, dkey}];
    if (ok) valid_ops.push_back(&op);
  }
  for (const auto& [id, n] : served) {
    if (n != 1) {
      rec.add(Family::Assignment, "graph[" + std::to_string(id) + "]", std::abs(n - 1.0));
    }
  }
  for (const auto* table : {&launches, &retrieves}) {
    for (const auto& [key, n] : *table) {
      if (n > 1) {
        rec.add(Family::Assignment,
                std::string(table == &launches ? "launch" : "retrieve") + "[stage=" +
                    std::to_string(key.first) + ",drone=" + std::to_string(key.second) + "]",
                n - 1.0);
      }
    }
  }
  // A drone is busy over the closed stage interval of each of its operations.
  for (std::size_t a = 0; a < valid_ops.size(); ++a) {
    for (std::size_t b = a + 1; b < valid_ops.size(); ++b) {
      const auto& x = *valid_ops[a];
      const auto& y = *valid_ops[b];
      if (x.drone != y.drone) continue;
      if (x.launch_stage == y.launch_stage) continue;  // already counted above
      if (x.launch_stage <= y.retrieve_stage && y.launch_stage <= x.retrieve_stage) {
        rec.add(Family::Assignment, op_path(x) + ".overlaps[graph=" + std::to_string(y.graph) + "]", 1.0);
      }
    }
  }

  // Per-operation route checks.
  for (const auto* opp : valid_ops) {
    const auto& op = *opp;
    const auto& g = in.graph_by_id(op.graph);
    const std::string where = op_path(op);
    bool edges_ok = !op.visits.empty();
    if (op.visits.empty()) {
      rec.add(Family::Subtour, where + ".visits", 1.0);
    }
    std::set<int> seen;
    for (const auto& v : op.visits) {
      if (v.edge < 0 || v.edge >= static_cast<int>(g.edges.size())) {
        rec.add(Family::Subtour, where + ".edge[" + std::to_string(v.edge) + "]", 1.0);
        edges_ok = false;
      } else if (!seen.insert(v.edge).second) {
        rec.add(Family::Subtour, where + ".edge[" + std::to_string(v.edge) + "].repeated", 1.0);
      }
    }
    if (!edges_ok) continue;

    std::map<int, double> covered;
    for (const auto& v : op.visits) {
      const std::string ew = where + ".edge[" + std::to_string(v.edge) + "]";
      const double box = std::max({-v.rho, v.rho - 1.0, -v.lambda, v.lambda - 1.0, 0.0});
      rec.add(Family::Coverage, ew + ".range", box);
      rec.add(Family::Coverage, ew + ".direction", v.forward ? v.rho - v.lambda : v.lambda - v.rho);
      covered[v.edge] = std::max(covered[v.edge], std::abs(v.lambda - v.rho));
    }
    if (in.visit_mode == VisitMode::PerEdge) {
      for (const auto& e : g.edges) {
        if (e.alpha <= 0.0) continue;
        const auto it = covered.find(e.id);
        const double got = it == covered.end() ? 0.0 : it->second;
        rec.add(Family::Coverage, where + ".edge[" + std::to_string(e.id) + "].alpha", e.alpha - got);
      }
    } else {
      double got = 0.0;
      for (const auto& [id, frac] : covered) got += frac * g.edges[static_cast<std::size_t>(id)].length();
      rec.add(Family::Coverage, where + ".alpha", g.alpha * g.total_length() - got);
    }

    const auto& ls = s.stages[static_cast<std::size_t>(op.launch_stage - 1)];
    const auto& rs = s.stages[static_cast<std::size_t>(op.retrieve_stage - 1)];
    const double drone_time = drone_length(g, op, ls.launch, rs.retrieve) / in.v_d;
    double window = 0.0;
    for (int t = op.launch_stage; t <= op.retrieve_stage; ++t) {
      window += s.stages[static_cast<std::size_t>(t - 1)].operation;
      if (t < op.retrieve_stage) window += s.stages[static_cast<std::size_t>(t)].transit;
    }
    rec.add(Family::Dcw, where, drone_time - window / in.v_m);
    const double after = op.retrieve_stage < T ? s.stages[static_cast<std::size_t>(op.retrieve_stage)].transit
                                               : s.final_transit;
    report.dcw_transit_residual = std::max(report.dcw_transit_residual, drone_time - after / in.v_m);
  }
  return report;
}

std::string report_table(const ValidationReport& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-12s %14s  %s\n", "family", "max residual", "status");
  out << line;
  for (int f = 0; f < kFamilyCount; ++f) {
    std::snprintf(line, sizeof line, "%-12s %14.6e  %s\n", std::string(to_string(Family(f))).c_str(),
                  r.max_residual[f], r.max_residual[f] <= r.tol ? "ok" : "FAIL");
    out << line;
  }
  std::snprintf(line, sizeof line, "tolerance %.3g, verdict %s\n", r.tol, r.pass() ? "PASS" : "FAIL");
  out << line;
  std::snprintf(line, sizeof line, "dcw against transit leg (diagnostic): %.6e\n", r.dcw_transit_residual);
  out << line;
  for (const auto& v : r.violations) {
    std::snprintf(line, sizeof line, "  %-10s %.6e  ", std::string(to_string(v.family)).c_str(), v.residual);
    out << line << v.location << '\n';
  }
  return out.str();
}

std::string save_report(const ValidationReport& r) {
  using text::fmt;
  std::ostringstream out;
  out << "ammdrpg-report v1\n";
  out << "tol " << fmt(r.tol) << '\n';
  out << "verdict " << (r.pass() ? "pass" : "fail") << '\n';
  for (int f = 0; f < kFamilyCount; ++f) {
    out << "family " << to_string(Family(f)) << ' ' << fmt(r.max_residual[f]) << '\n';
  }
  out << "dcw_transit " << fmt(r.dcw_transit_residual) << '\n';
  out << "violations " << r.violations.size() << '\n';
  for (const auto& v : r.violations) {
    out << "  violation " << to_string(v.family) << ' ' << v.location << ' ' << fmt(v.residual) << '\n';
  }
  return out.str();
}

ValidationReport load_report(std::string_view doc) {
  text::Reader r(doc);
  if (r.done() || r.peek() != std::vector<std::string>{"ammdrpg-report", "v1"}) {
    throw FormatError("header", "expected 'ammdrpg-report v1'");
  }
  r.next();
  ValidationReport rep;
  rep.tol = text::parse_double(r.expect("tol", "tol", 1)[0], "tol");
  const auto verdict = r.expect("verdict", "verdict", 1)[0];
  auto family_of = [](const std::string& name, const std::string& path) {
    for (int f = 0; f < kFamilyCount; ++f) {
      if (to_string(Family(f)) == name) return Family(f);
    }
    throw FormatError(path, "unknown family '" + name + "'");
  };
  for (int f = 0; f < kFamilyCount; ++f) {
    const std::string path = "family[" + std::to_string(f) + "]";
    const auto v = r.expect("family", path, 2);
    rep.max_residual[static_cast<int>(family_of(v[0], path))] = text::parse_double(v[1], path);
  }
  rep.dcw_transit_residual = text::parse_double(r.expect("dcw_transit", "dcw_transit", 1)[0], "dcw_transit");
  const long n = text::parse_int(r.expect("violations", "violations", 1)[0], "violations");
  for (long k = 0; k < n; ++k) {
    const std::string path = "violations[" + std::to_string(k) + "]";
    const auto v = r.expect("violation", path, 3);
    rep.violations.push_back({family_of(v[0], path), v[1], text::parse_double(v[2], path + ".residual")});
  }
  if (!r.done()) {
    throw FormatError("<document>", "trailing content");
  }
  if ((verdict == "pass") != rep.pass()) {
    throw FormatError("verdict", "inconsistent with the residuals");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// synchronisation reducibility

std::vector<double> sync_reducible_residuals(Point xl, Point xr, Point p1, Point p2, Point xl1,
                                             Point xl2, Point xr1, Point xr2, double v_m, double v_d,
                                             double endurance) {
  const double ship = dist(xl, xr) / v_m;
  return {(dist(xl, p1) + dist(p1, xr)) / v_d - ship, (dist(xl, p2) + dist(p2, xr)) / v_d - ship,
          ship - endurance, dist(xl, xr) - (dist(xl1, xl2) + dist(xl2, xr1) + dist(xr1, xr2))};
}

std::optional<std::pair<Point, Point>> check_sync_reducible(Point p1, Point p2, Point xl1, Point xl2,
                                                            Point xr1, Point xr2, double v_m,
                                                            double v_d, double endurance) {
  if (!(v_m > 0.0) || !(v_d > 0.0)) {
    throw std::invalid_argument("check_sync_reducible: speeds must be positive");
  }
  const Point pts[] = {p1, p2, xl1, xl2, xr1, xr2};
  Box box{p1, p1};
  for (const auto& p : pts) {
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  }
  auto merit = [&](Point xl, Point xr) {
    const auto r = sync_reducible_residuals(xl, xr, p1, p2, xl1, xl2, xr1, xr2, v_m, v_d, endurance);
    return *std::max_element(r.begin(), r.end());
  };
  auto accept = [&](Point xl, Point xr) { return merit(xl, xr) <= 1e-9; };

  // Candidates: the input points themselves, then a 4-D grid.
  Point best_l = xl1;
  Point best_r = xr2;
  double best = merit(best_l, best_r);
  for (const auto& a : pts) {
    for (const auto& b : pts) {
      const double m = merit(a, b);
      if (m < best) best = m, best_l = a, best_r = b;
    }
  }
  constexpr int kGrid = 11;
  const double sx = box.hi.x - box.lo.x;
  const double sy = box.hi.y - box.lo.y;
  std::vector<Point> grid;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      grid.push_back({box.lo.x + sx * i / (kGrid - 1), box.lo.y + sy * j / (kGrid - 1)});
    }
  }
  if (best > 1e-9) {
    for (const auto& a : grid) {
      for (const auto& b : grid) {
        const double m = merit(a, b);
        if (m < best) best = m, best_l = a, best_r = b;
      }
    }
  }

  // Pattern search on the max residual.
  double step = std::max({sx, sy, 1e-6}) / (kGrid - 1);
  static constexpr double kDirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  while (best > 1e-9 && step > 1e-10 * (1.0 + std::max(sx, sy))) {
    bool moved = false;
    for (int which = 0; which < 2; ++which) {
      for (const auto& d : kDirs) {
        Point l = best_l;
        Point r = best_r;
        Point& q = which == 0 ? l : r;
        q = q + step * Point{d[0], d[1]};
        const double m = merit(l, r);
        if (m < best) {
          best = m, best_l = l, best_r = r;
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  if (accept(best_l, best_r)) {
    return std::make_pair(best_l, best_r);
  }
  return std::nullopt;
}

}  // namespace ammdrpg
