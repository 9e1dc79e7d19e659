#include <cmath>

#include "ammdrpg/error.h"
#include "ammdrpg/random.h"
#include "ammdrpg/validate.h"
#include "doctest.h"

using namespace ammdrpg;

namespace {

Instance tiny() {
  Instance in;
  in.origin = {0, 0};
  in.destination = {20, 0};
  in.v_m = 1;
  in.v_d = 2;
  in.endurance = 100;
  in.graphs.push_back(make_graph(0, {{10, -1}, {10, 1}}, {{0, 1, 1.0}}, 1.0));
  return in;
}

// Launch at the origin, retrieve at the destination, one full forward pass.
Solution straight() {
  Solution s;
  s.origin = {0, 0};
  s.destination = {20, 0};
  s.stages.push_back({{0, 0}, {20, 0}, 0.0, 20.0});
  s.operations.push_back({0, 1, 1, 1, {{0, 0.0, 1.0, true}}});
  s.objective = 20.0;
  return s;
}

}  // namespace

TEST_CASE("feasible hand-built solution passes") {
  const auto r = check_solution(tiny(), straight(), 1e-9);
  CHECK(r.pass());
  CHECK(r.violations.empty());
  auto s = straight();
  s.mode = SyncMode::Async;
  CHECK(check_solution(tiny(), s, 1e-9).pass());
}

TEST_CASE("coverage violation is localised") {
  auto s = straight();
  s.operations[0].visits[0].lambda = 0.99;
  const auto r = check_solution(tiny(), s, 1e-6);
  CHECK_FALSE(r.pass());
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].family == Family::Coverage);
  CHECK(r.violations[0].location == "operation[graph=0].edge[0].alpha");
  CHECK(r.violations[0].residual == doctest::Approx(0.01));
}

TEST_CASE("drone time beyond the stage window is a DCW violation") {
  auto in = tiny();
  in.v_d = 1.0;  // drone path 22.1 > 20
  const auto r = check_solution(in, straight(), 1e-6);
  CHECK(r.residual(Family::Dcw) == doctest::Approx(2 * std::sqrt(101.0) + 2 - 20));
  CHECK_FALSE(r.pass());
}

TEST_CASE("capacity canonical and literal") {
  auto in = tiny();
  in.endurance = 15;
  const auto r = check_solution(in, straight(), 1e-6);
  CHECK(r.residual(Family::Capacity) == doctest::Approx(5.0));
  in.endurance = 25;
  CHECK(check_solution(in, straight(), 1e-6).pass());
  CheckOptions literal;
  literal.raw_endurance_cap = true;
  in.v_m = 0.5;
  in.endurance = 45;  // v_m * N = 22.5 >= 20, N = 45 >= 20
  CHECK(check_solution(in, straight(), 1e-6, literal).residual(Family::Capacity) == 0.0);
}

TEST_CASE("swapping retrieve points breaks distances and boundary legs") {
  auto in = tiny();
  in.graphs.push_back(make_graph(1, {{15, -1}, {15, 1}}, {{0, 1, 1.0}}, 1.0));
  Solution s;
  s.origin = {0, 0};
  s.destination = {20, 0};
  s.stages.push_back({{5, 0}, {10, 0}, 5.0, 5.0});
  s.stages.push_back({{12, 0}, {18, 0}, 2.0, 6.0});
  s.final_transit = 2.0;
  s.objective = 20.0;
  in.v_d = 10;
  s.operations.push_back({0, 1, 1, 1, {{0, 0.0, 1.0, true}}});
  s.operations.push_back({1, 1, 2, 2, {{0, 1.0, 0.0, false}}});
  REQUIRE(check_solution(in, s, 1e-9).pass());
  std::swap(s.stages[0].retrieve, s.stages[1].retrieve);
  const auto r = check_solution(in, s, 1e-9);
  CHECK_FALSE(r.pass());
  CHECK(r.residual(Family::Distances) > 1.0);
}

TEST_CASE("assignment rules") {
  auto in = tiny();
  in.graphs.push_back(make_graph(1, {{15, -1}, {15, 1}}, {{0, 1, 1.0}}, 1.0));
  in.n_drones = 2;
  Solution s;
  s.origin = {0, 0};
  s.destination = {20, 0};
  s.stages.push_back({{0, 0}, {10, 0}, 0.0, 10.0});
  s.stages.push_back({{10, 0}, {20, 0}, 0.0, 10.0});
  s.objective = 20.0;
  in.v_d = 100;

  SUBCASE("missing graph") {
    s.operations.push_back({0, 1, 1, 1, {{0, 0.0, 1.0, true}}});
    const auto r = check_solution(in, s, 1e-9);
    CHECK(r.residual(Family::Assignment) == 1.0);
  }
  SUBCASE("two graphs on one drone in one stage") {
    s.operations.push_back({0, 1, 1, 1, {{0, 0.0, 1.0, true}}});
    s.operations.push_back({1, 1, 1, 1, {{0, 0.0, 1.0, true}}});
    CHECK(check_solution(in, s, 1e-9).residual(Family::Assignment) == 1.0);
  }
  SUBCASE("two drones in one stage is allowed unless literal stage cap") {
    s.operations.push_back({0, 1, 1, 1, {{0, 0.0, 1.0, true}}});
    s.operations.push_back({1, 2, 1, 1, {{0, 0.0, 1.0, true}}});
    CHECK(check_solution(in, s, 1e-9).pass());
    CheckOptions o;
    o.fleet_stage_cap = true;
    CHECK_FALSE(check_solution(in, s, 1e-9, o).pass());
  }
  SUBCASE("cross-stage operation only in async mode") {
    s.operations.push_back({0, 1, 1, 2, {{0, 0.0, 1.0, true}}});
    s.operations.push_back({1, 2, 2, 2, {{0, 0.0, 1.0, true}}});
    CHECK_FALSE(check_solution(in, s, 1e-9).pass());
    s.mode = SyncMode::Async;
    CHECK(check_solution(in, s, 1e-9).pass());
    // Same drone while still in flight.
    s.operations[1].drone = 1;
    CHECK(check_solution(in, s, 1e-9).residual(Family::Assignment) == 1.0);
  }
  SUBCASE("repeated edge in a route") {
    s.operations.push_back({0, 1, 1, 1, {{0, 0.0, 1.0, true}, {0, 1.0, 0.0, false}}});
    s.operations.push_back({1, 1, 2, 2, {{0, 0.0, 1.0, true}}});
    CHECK(check_solution(in, s, 1e-9).residual(Family::Subtour) == 1.0);
  }
}

TEST_CASE("verdict is monotone in tolerance") {
  auto s = straight();
  s.stages[0].launch = {1e-4, 0};
  const auto tight = check_solution(tiny(), s, 1e-6);
  CHECK_FALSE(tight.pass());
  for (double tol : {1e-3, 1e-2, 1.0}) {
    CHECK(check_solution(tiny(), s, tol).pass());
  }
}

TEST_CASE("solution and report round trip") {
  auto s = straight();
  s.instance_fingerprint = instance_fingerprint(tiny());
  s.mode = SyncMode::Async;
  const auto text = save_solution(s);
  CHECK(save_solution(load_solution(text)) == text);
  CHECK_THROWS_AS(load_solution("ammdrpg-solution v2\n"), FormatError);

  auto bad = s;
  bad.operations[0].visits[0].lambda = 0.5;
  const auto r = check_solution(tiny(), bad, 1e-6);
  const auto doc = save_report(r);
  CHECK(save_report(load_report(doc)) == doc);
  CHECK(report_table(r).find("FAIL") != std::string::npos);
}

TEST_CASE("sync reducibility") {
  // Fully degenerate configuration.
  const Point o{3, 4};
  const auto w = check_sync_reducible(o, o, o, o, o, o, 1, 2, 1);
  REQUIRE(w.has_value());
  CHECK(dist(w->first, o) <= 1e-9);

  // Distinct targets and a near-zero drone speed: no witness.
  CHECK_FALSE(check_sync_reducible({0, 5}, {10, 5}, {0, 0}, {5, 0}, {5, 0}, {10, 0}, 1, 1e-9, 1e6));

  // Targets on the mothership line with a fast drone: a witness exists and
  // satisfies the path-length condition.
  const auto w2 = check_sync_reducible({2, 0.1}, {8, 0.1}, {0, 0}, {4, 0}, {6, 0}, {10, 0}, 1, 3, 100);
  REQUIRE(w2.has_value());
  const auto res = sync_reducible_residuals(w2->first, w2->second, {2, 0.1}, {8, 0.1}, {0, 0}, {4, 0},
                                            {6, 0}, {10, 0}, 1, 3, 100);
  for (double r : res) CHECK(r <= 1e-9);
}
