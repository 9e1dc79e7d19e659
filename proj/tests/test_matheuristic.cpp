#include <algorithm>
#include <cmath>

#include "ammdrpg/error.h"
#include "ammdrpg/exact.h"
#include "ammdrpg/matheuristic.h"
#include "ammdrpg/validate.h"
#include "doctest.h"
#include "suite.h"

using namespace ammdrpg;

namespace {

Instance empty_plane(int drones, double endurance) {
  Instance in;
  in.origin = {0, 0};
  in.destination = {20, 0};
  in.v_m = 1;
  in.v_d = 2;
  in.endurance = endurance;
  in.n_drones = drones;
  return in;
}

TargetGraph tiny(int id, Point at) { return make_graph(id, {at, at + Point{0.5, 0}}, {{0, 1, 1.0}}, 1.0); }

// Coverage reached by a tour under the graph's visit rule.
bool covers(const TargetGraph& g, const DroneTour& t, VisitMode mode) {
  double covered = 0;
  std::vector<double> frac(g.edges.size(), 0.0);
  for (const auto& v : t.visits) {
    frac[static_cast<std::size_t>(v.edge)] = std::abs(v.lambda - v.rho);
    covered += std::abs(v.lambda - v.rho) * g.edges[static_cast<std::size_t>(v.edge)].length();
    if (v.forward != (v.lambda >= v.rho)) return false;
  }
  if (mode == VisitMode::WholeGraph) return covered >= g.alpha * g.total_length() - 1e-9;
  for (const auto& e : g.edges) {
    if (frac[static_cast<std::size_t>(e.id)] < e.alpha - 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("step 1 tours") {
  auto g = make_graph(0, {{3, 0}, {5, 0}}, {{0, 1, 1.0}}, 1.0);
  auto t = step1_drone_tour(g, {0, 0}, VisitMode::PerEdge);
  REQUIRE(t.visits.size() == 1);
  CHECK(t.interior_length == doctest::Approx(2.0));
  CHECK(t.visits[0].forward);

  g.edges[0].alpha = 0.5;
  t = step1_drone_tour(g, {0, 0}, VisitMode::PerEdge);
  CHECK(t.visits[0].rho == 0.0);
  CHECK(t.visits[0].lambda == doctest::Approx(0.5));

  // L-shape with one edge twice the other: the long edge alone covers half the graph.
  const auto l = make_graph(0, {{0, 2}, {0, 0}, {1, 0}}, {{0, 1, 1.0}, {1, 2, 1.0}}, 0.5);
  t = step1_drone_tour(l, {3, 3}, VisitMode::WholeGraph);
  REQUIRE(t.visits.size() == 1);
  CHECK(t.visits[0].edge == 0);
  CHECK(covers(l, t, VisitMode::WholeGraph));

  Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const auto r = suite::random_graph(0, 1 + trial % 5, {rng.uniform(-3, 3), rng.uniform(-3, 3)}, false, rng);
    for (auto mode : {VisitMode::PerEdge, VisitMode::WholeGraph}) {
      const auto a = step1_drone_tour(r, {0, 0}, mode);
      CHECK(covers(r, a, mode));
      const auto b = step1_drone_tour(r, {0, 0}, mode);
      CHECK(a.interior_length == b.interior_length);
      // Interior length is the realised drone path.
      double len = 0;
      for (std::size_t k = 0; k < a.visits.size(); ++k) {
        const auto& s = r.edges[static_cast<std::size_t>(a.visits[k].edge)].segment;
        len += dist(lerp(s, a.visits[k].rho), lerp(s, a.visits[k].lambda));
        if (k > 0) {
          const auto& p = r.edges[static_cast<std::size_t>(a.visits[k - 1].edge)].segment;
          len += dist(lerp(p, a.visits[k - 1].lambda), lerp(s, a.visits[k].rho));
        }
      }
      CHECK(len == doctest::Approx(a.interior_length));
    }
  }
}

TEST_CASE("step 2 clustering") {
  auto in = empty_plane(2, 10);
  in.graphs = {tiny(0, {5, 0}), tiny(1, {5, 1})};
  std::map<int, DroneTour> tours;
  for (const auto& g : in.graphs) tours[g.id] = step1_drone_tour(g, in.origin, in.visit_mode);
  auto c = step2_cluster(in, tours, 1, 50);
  CHECK(c.clusters.size() == 1);
  CHECK(cluster_time(in, tours, c.clusters[0], c.meeting[0]) <= in.endurance + 1e-9);
  CHECK(step2_cluster(in, tours, 1, 50, true).clusters.size() == 2);

  in.n_drones = 1;
  CHECK(step2_cluster(in, tours, 1, 50).clusters.size() == 2);

  in.endurance = 0.1;
  try {
    step2_cluster(in, tours, 1, 50);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.graph() == 0);
  }
  CHECK_THROWS_AS(step2_cluster(in, tours, 1, 0), std::invalid_argument);
}

TEST_CASE("step 3 reference points") {
  auto in = empty_plane(1, 10);
  in.graphs = {make_graph(0, {{3, -0.25}, {3, 0.25}}, {{0, 1, 1.0}}, 1.0)};
  std::map<int, DroneTour> tours{{0, step1_drone_tour(in.graphs[0], in.origin, in.visit_mode)}};
  auto c = step3_reference_points(step2_cluster(in, tours, 1, 5), in, tours);
  CHECK(dist(c.reference[0], in.origin) == 0.0);

  // Endurance exactly at the meeting point's flight time leaves no room to move.
  in.endurance = cluster_time(in, tours, {0}, c.meeting[0]);
  c = step3_reference_points(c, in, tours);
  // Flight time grows quadratically off the edge, so the 1e-9 slack buys about 1e-5 of movement.
  CHECK(dist(c.reference[0], c.meeting[0]) <= 1e-4);

  in.endurance = 2.0;
  c = step3_reference_points(c, in, tours);
  CHECK(cluster_time(in, tours, {0}, c.reference[0]) <= in.endurance + 1e-9);
  CHECK(dist(c.reference[0], in.origin) < dist(c.meeting[0], in.origin));
}

TEST_CASE("step 4 path") {
  CHECK(step4_tsp({}, {0, 0}, {3, 4}).length == doctest::Approx(5.0));
  CHECK(step4_tsp({{1, 1}}, {0, 0}, {2, 0}).length == doctest::Approx(2 * std::sqrt(2.0)));
  const auto p = step4_tsp({{3, 0}, {1, 0}, {2, 0}}, {0, 0}, {4, 0});
  CHECK(p.length == doctest::Approx(4.0));
  CHECK(p.order == std::vector<int>{1, 2, 0});

  // Exact against brute force on small sets; the heuristic beyond 12 points returns a permutation.
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> pts;
    for (int k = 0; k < 1 + trial % 6; ++k) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    std::vector<int> perm(pts.size());
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<int>(k);
    double best = 1e300;
    do {
      double l = dist({0, 0}, pts[static_cast<std::size_t>(perm.front())]) + dist(pts[static_cast<std::size_t>(perm.back())], {10, 0});
      for (std::size_t k = 1; k < perm.size(); ++k) l += dist(pts[static_cast<std::size_t>(perm[k - 1])], pts[static_cast<std::size_t>(perm[k])]);
      best = std::min(best, l);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(step4_tsp(pts, {0, 0}, {10, 0}).length == doctest::Approx(best).epsilon(1e-12));
  }
  std::vector<Point> many;
  for (int k = 0; k < 15; ++k) many.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
  auto big = step4_tsp(many, {0, 0}, {10, 0});
  std::sort(big.order.begin(), big.order.end());
  for (int k = 0; k < 15; ++k) CHECK(big.order[static_cast<std::size_t>(k)] == k);
}

TEST_CASE("four graphs on two drones") {
  // Graphs 0 and 2 sit close together; 1 and 3 are far from everything else.
  auto in = empty_plane(2, 3);
  in.destination = {30, 0};
  in.graphs = {tiny(0, {4, 0}), tiny(1, {14, 6}), tiny(2, {4, 1}), tiny(3, {24, -6})};
  const auto r = run_matheuristic(in);
  CHECK(r.skeleton.n_stages == 3);
  CHECK(r.clustering.clusters.front() == std::vector<int>{0, 2});
  CHECK(r.clustering.clusters[1] == std::vector<int>{1});
  CHECK(r.clustering.clusters[2] == std::vector<int>{3});
  CHECK(check_solution(in, r.solution, 1e-6).pass());
}

TEST_CASE("all at the origin") {
  Instance in;
  in.origin = in.destination = {0, 0};
  in.v_m = 1;
  in.v_d = 2;
  in.endurance = 1;
  in.graphs.push_back(make_graph(0, {{0, 0}, {0, 0}}, {{0, 1, 1.0}}, 1.0));
  CHECK(std::abs(run_matheuristic(in).solution.objective) <= 1e-6);
}

TEST_CASE("suite: feasible, deterministic, never below the optimum") {
  for (int k = 0; k < suite::kSize; k += 3) {
    CAPTURE(k);
    const auto in = suite::instance(k);
    const auto r = run_matheuristic(in);
    CHECK(check_solution(in, r.solution, 1e-6).pass());
    auto as_async = r.solution;
    as_async.mode = SyncMode::Async;
    CHECK(check_solution(in, as_async, 1e-6).pass());
    CHECK(save_solution(run_matheuristic(in).solution) == save_solution(r.solution));
    const auto exact = solve_exact(in, SyncMode::Sync, {}, 1e-6);
    CHECK(r.solution.objective >= exact.solution.objective - 1e-6);
  }
}

TEST_CASE("warm start") {
  const auto in = suite::instance(3);
  const auto r = run_matheuristic(in);
  const auto text = save_warmstart(in, r.skeleton, r.solution);
  CHECK(text.rfind("# ammdrpg-warmstart v1\n", 0) == 0);
  const auto values = load_warmstart(text);
  const auto m = build_sync_model(in);
  long binaries = 0, ones = 0;
  for (const auto& v : m.variables) binaries += v.kind == VarKind::Binary;
  for (const auto& [name, v] : values) {
    CHECK_NOTHROW(m.var(name));
    ones += v;
  }
  CHECK(static_cast<long>(values.size()) == binaries);
  long visited = 0;
  for (const auto& op : r.skeleton.operations) visited += static_cast<long>(op.route.size());
  CHECK(ones > visited);
  CHECK_THROWS_AS(load_warmstart("hello\n"), FormatError);
  CHECK(save_warmstart(in, r.skeleton, r.solution) == text);
}
