#include <cmath>

#include "ammdrpg/convex_sub.h"
#include "ammdrpg/error.h"
#include "ammdrpg/exact.h"
#include "ammdrpg/grid_oracle.h"
#include "doctest.h"
#include "suite.h"

using namespace ammdrpg;

namespace {

// One edge (10,-1)-(10,1) between orig (0,0) and dest (20,0); the drone is twice
// as fast as the mothership.
Instance crossing() {
  Instance in;
  in.origin = {0, 0};
  in.destination = {20, 0};
  in.v_m = 1;
  in.v_d = 2;
  in.endurance = 100;
  in.graphs.push_back(make_graph(0, {{10, -1}, {10, 1}}, {{0, 1, 1.0}}, 1.0));
  return in;
}

FixedCombinatorics single_edge() {
  FixedCombinatorics f;
  f.n_stages = 1;
  f.operations.push_back({0, 1, 1, 1, {{0, true}}});
  return f;
}

// Frozen grid_oracle values at resolution 0.02.
constexpr double kCrossing = 20.0;
constexpr double kRoundTrip = 11.049875621;   // destination moved to the origin
constexpr double kHalfEdge = 10.512512122;    // round trip with alpha 0.5

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("crossing edge matches the oracle") {
  auto in = crossing();
  auto r = solve_fixed(in, single_edge(), SyncMode::Sync, 1e-6);
  CHECK(rel(r.solution.objective, kCrossing) <= 1e-3);
  CHECK(r.residuals.pass());
  CHECK(check_solution(in, r.solution, 1e-6).pass());
  CHECK(rel(grid_oracle(in, 0.02), kCrossing) <= 1e-9);

  in.destination = {0, 0};
  r = solve_fixed(in, single_edge(), SyncMode::Sync, 1e-6);
  CHECK(rel(r.solution.objective, kRoundTrip) <= 1e-3);
  CHECK(rel(grid_oracle(in, 0.02), kRoundTrip) <= 1e-9);

  in.graphs[0].edges[0].alpha = 0.5;
  r = solve_fixed(in, single_edge(), SyncMode::Sync, 1e-6);
  CHECK(rel(r.solution.objective, kHalfEdge) <= 1e-3);
  CHECK(rel(grid_oracle(in, 0.02), kHalfEdge) <= 1e-9);
  const auto& v = r.solution.operations.at(0).visits.at(0);
  CHECK(std::abs(v.lambda - v.rho) >= 0.5 - 1e-6);
}

TEST_CASE("short endurance is infeasible") {
  auto in = crossing();
  in.destination = {0, 0};
  in.endurance = 0.9;
  CHECK(std::isinf(grid_oracle(in, 0.02)));
  try {
    solve_fixed(in, single_edge(), SyncMode::Sync, 1e-6);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.graph() == 0);
  }
}

TEST_CASE("degenerate geometry gives zero") {
  Instance in;
  in.origin = in.destination = {0, 0};
  in.v_m = 1;
  in.v_d = 2;
  in.endurance = 1;
  in.graphs.push_back(make_graph(0, {{0, 0}, {0, 0}}, {{0, 1, 1.0}}, 1.0));
  auto r = solve_fixed(in, single_edge(), SyncMode::Sync, 1e-6);
  CHECK(std::abs(r.solution.objective) <= 1e-6);
  for (const auto& st : r.solution.stages) {
    CHECK(dist(st.launch, in.origin) <= 1e-6);
    CHECK(dist(st.retrieve, in.origin) <= 1e-6);
  }
}

TEST_CASE("random restarts agree") {
  const double tol = 1e-6;
  int checked = 0;
  for (int k = 0; k < suite::kSize && checked < 5; k += 3) {
    const auto in = suite::instance(k);
    const auto sk = enumerate_skeletons(in, {}, SyncMode::Sync);
    const auto& f = sk[sk.size() / 2];
    double base;
    try {
      base = solve_fixed(in, f, SyncMode::Sync, tol).solution.objective;
    } catch (const InfeasibleError&) {
      continue;
    }
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      SolverOptions o;
      o.random_start = seed;
      const double v = solve_fixed(in, f, SyncMode::Sync, tol, o).solution.objective;
      CHECK(std::abs(v - base) <= 10 * tol * (1 + std::abs(base)));
    }
    ++checked;
  }
  CHECK(checked == 5);
}

TEST_CASE("merit never increases within a barrier weight") {
  const auto in = suite::instance(7);
  const auto sk = enumerate_skeletons(in, {}, SyncMode::Async);
  SolverOptions o;
  o.keep_trace = true;
  for (std::size_t i = 0; i < sk.size(); i += sk.size() / 4) {
    try {
      const auto r = solve_fixed(in, sk[i], SyncMode::Async, 1e-6, o);
      REQUIRE(!r.trace.empty());
      for (std::size_t j = 1; j < r.trace.size(); ++j) {
        if (r.trace[j].outer != r.trace[j - 1].outer) continue;
        CHECK(r.trace[j].merit <= r.trace[j - 1].merit);
      }
    } catch (const InfeasibleError&) {
    }
  }
}

TEST_CASE("objective scales with the coordinates") {
  const auto in = suite::instance(3);
  const auto f = enumerate_skeletons(in, {}, SyncMode::Sync).front();
  const double base = solve_fixed(in, f, SyncMode::Sync, 1e-6).solution.objective;
  for (double s : {0.5, 3.0}) {
    Instance scaled = in;
    scaled.origin = s * in.origin;
    scaled.destination = s * in.destination;
    scaled.endurance = s * in.endurance;
    for (auto& g : scaled.graphs) {
      std::vector<Point> nodes;
      for (const auto& p : g.nodes) nodes.push_back(s * p);
      std::vector<EdgeSpec> edges;
      for (const auto& e : g.edges) edges.push_back({e.from, e.to, e.alpha});
      g = make_graph(g.id, nodes, edges, g.alpha);
    }
    const double v = solve_fixed(scaled, f, SyncMode::Sync, 1e-6).solution.objective;
    CHECK(std::abs(v - s * base) <= 1e-6 * (1 + s * base));
  }
}

TEST_CASE("feasibility report") {
  auto in = crossing();
  const auto f = single_edge();
  const double tol = 1e-6;
  auto r = solve_fixed(in, f, SyncMode::Sync, tol);
  CHECK(feasibility_report(in, f, r, tol).pass());

  auto async = r;
  async.solution.mode = SyncMode::Async;
  CHECK(feasibility_report(in, f, async, tol).pass());

  // Move the launch point along the incoming leg; the stored distance no longer matches.
  auto moved = r;
  auto& st = moved.solution.stages[0];
  const Point dir = st.launch - in.origin;
  st.launch = st.launch + (10 * tol / std::hypot(dir.x, dir.y)) * dir;
  const auto rep = feasibility_report(in, f, moved, tol);
  CHECK(rep.residual(Family::Distances) > tol);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("skeleton checks") {
  const auto in = crossing();
  auto f = single_edge();
  CHECK_NOTHROW(check_combinatorics(in, f, SyncMode::Sync));
  f.operations[0].retrieve_stage = 2;
  f.n_stages = 2;
  CHECK_THROWS_AS(check_combinatorics(in, f, SyncMode::Sync), std::invalid_argument);
  f = single_edge();
  f.operations[0].drone = 2;
  CHECK_THROWS_AS(check_combinatorics(in, f, SyncMode::Sync), std::invalid_argument);
  f = single_edge();
  f.operations[0].route.clear();
  CHECK_THROWS_AS(check_combinatorics(in, f, SyncMode::Sync), std::invalid_argument);
  f = single_edge();
  f.operations[0].route.push_back({0, false});
  CHECK_THROWS_AS(check_combinatorics(in, f, SyncMode::Sync), std::invalid_argument);
  CHECK_THROWS_AS(solve_fixed(in, single_edge(), SyncMode::Sync, 0.0), std::invalid_argument);
}

TEST_CASE("binary view") {
  FixedCombinatorics f;
  f.n_stages = 2;
  f.operations.push_back({3, 1, 1, 2, {{4, true}, {2, false}}});
  const auto b = binary_view(f);
  CHECK(b.u.at({3, 4, 1, 1}) == 1);
  CHECK(b.v.at({3, 2, 2, 1}) == 1);
  CHECK(b.u.size() == 1);
  CHECK(b.v.size() == 1);
  CHECK(b.z.at({3, 4, 2}) == 1);
  CHECK(b.z.size() == 1);
  CHECK(b.mu.size() == 2);
  CHECK(b.entry.at({3, 4}) == 1);
  CHECK(b.entry.at({3, 2}) == 0);
  CHECK(b.order.at({3, 4}) == 0);
  CHECK(b.order.at({3, 2}) == 1);
}
