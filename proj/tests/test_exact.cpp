#include <cmath>
#include <set>

#include "ammdrpg/error.h"
#include "ammdrpg/exact.h"
#include "ammdrpg/grid_oracle.h"
#include "doctest.h"
#include "suite.h"

using namespace ammdrpg;

namespace {

Instance base(int n_drones) {
  Instance in;
  in.origin = {0, 0};
  in.destination = {8, 0};
  in.v_m = 1;
  in.v_d = 2;
  in.endurance = 6;
  in.n_drones = n_drones;
  return in;
}

long factorial(int k) { return k <= 1 ? 1 : k * factorial(k - 1); }

// Closed form: every admissible edge subset S contributes |S|! orders times
// 2^|S| entry directions.
long route_census(const TargetGraph& g, VisitMode mode) {
  const int E = static_cast<int>(g.edges.size());
  long n = 0;
  for (int mask = 1; mask < (1 << E); ++mask) {
    double len = 0;
    bool ok = true;
    int k = 0;
    for (int e = 0; e < E; ++e) {
      const bool in = mask >> e & 1;
      if (in) {
        ++k;
        len += g.edges[static_cast<std::size_t>(e)].length();
      } else if (mode == VisitMode::PerEdge && g.edges[static_cast<std::size_t>(e)].alpha > 0) {
        ok = false;
      }
    }
    if (mode == VisitMode::WholeGraph && len < g.alpha * g.total_length() - 1e-12) ok = false;
    if (ok) n += factorial(k) << k;
  }
  return n;
}

// Stage layouts by brute force over stage intervals: every stage holds an
// event and at most `drones` intervals overlap at any stage.
long structure_census(int graphs, int drones, bool async) {
  if (graphs == 0) return 1;
  long n = 0;
  for (int T = 1; T <= graphs; ++T) {
    std::vector<std::pair<int, int>> iv;
    for (int a = 1; a <= T; ++a) {
      for (int b = a; b <= (async ? T : a); ++b) iv.push_back({a, b});
    }
    const int m = static_cast<int>(iv.size());
    int combos = 1;
    for (int g = 0; g < graphs; ++g) combos *= m;
    for (int c = 0; c < combos; ++c) {
      std::vector<std::pair<int, int>> pick;
      for (int g = 0, r = c; g < graphs; ++g, r /= m) pick.push_back(iv[static_cast<std::size_t>(r % m)]);
      bool ok = true;
      for (int t = 1; t <= T && ok; ++t) {
        int events = 0, load = 0;
        for (auto [a, b] : pick) {
          events += (a == t) + (b == t);
          load += a <= t && t <= b;
        }
        ok = events > 0 && load <= drones;
      }
      n += ok;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("route census") {
  auto in = base(1);
  in.graphs.push_back(make_graph(0, {{3, 1}, {4, 1}}, {{0, 1, 0.5}}, 1.0));
  CHECK(enumerate_skeletons(in, {}, SyncMode::Sync).size() == 2);

  in.visit_mode = VisitMode::WholeGraph;
  in.graphs[0] = make_graph(0, {{3, 1}, {4, 1}, {4, 2}}, {{0, 1, 1.0}, {1, 2, 1.0}}, 0.1);
  CHECK(enumerate_skeletons(in, {}, SyncMode::Sync).size() == 12);
  CHECK(route_census(in.graphs[0], in.visit_mode) == 12);

  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = suite::random_graph(0, 1 + trial % 3, {3, 0}, trial % 2 == 0, rng);
    for (auto mode : {VisitMode::PerEdge, VisitMode::WholeGraph}) {
      auto gg = g;
      for (auto& e : gg.edges) {
        if (rng.below(3) == 0) e.alpha = 0;
      }
      const auto routes = enumerate_routes(gg, mode);
      CHECK(static_cast<long>(routes.size()) == route_census(gg, mode));
      std::set<std::vector<std::pair<int, bool>>> distinct;
      for (const auto& r : routes) {
        std::vector<std::pair<int, bool>> key;
        for (const auto& s : r) key.push_back({s.edge, s.forward});
        distinct.insert(key);
      }
      CHECK(distinct.size() == routes.size());
    }
  }
}

TEST_CASE("structure census") {
  for (int graphs = 0; graphs <= 2; ++graphs) {
    for (int drones = 1; drones <= 2; ++drones) {
      auto in = base(drones);
      for (int g = 0; g < graphs; ++g) in.graphs.push_back(make_graph(g, {{3, 1}, {4, 1}}, {{0, 1, 1.0}}, 1.0));
      for (auto mode : {SyncMode::Sync, SyncMode::Async}) {
        CHECK(static_cast<long>(enumerate_structures(in, mode).size()) ==
              structure_census(graphs, drones, mode == SyncMode::Async));
      }
    }
  }
  auto in = base(2);
  in.graphs.push_back(make_graph(0, {{3, 1}, {4, 1}}, {{0, 1, 1.0}}, 1.0));
  in.graphs.push_back(make_graph(1, {{5, 1}, {6, 1}}, {{0, 1, 1.0}}, 1.0));
  CHECK(enumerate_structures(in, SyncMode::Sync).size() == 3);
  CHECK(enumerate_structures(in, SyncMode::Async).size() == 8);
  in.n_drones = 1;
  CHECK(enumerate_structures(in, SyncMode::Sync).size() == 2);
  CHECK(enumerate_structures(in, SyncMode::Async).size() == 2);
}

TEST_CASE("skeleton stream") {
  auto in = base(1);
  CHECK(enumerate_skeletons(in, {}, SyncMode::Sync).size() == 1);

  for (int k = 0; k < suite::kSize; ++k) {
    const auto inst = suite::instance(k);
    for (auto mode : {SyncMode::Sync, SyncMode::Async}) {
      const auto sk = enumerate_skeletons(inst, {}, mode);
      long routes = 1;
      for (const auto& g : inst.graphs) routes *= route_census(g, inst.visit_mode);
      CHECK(static_cast<long>(sk.size()) ==
            routes * structure_census(static_cast<int>(inst.graphs.size()), inst.n_drones, mode == SyncMode::Async));
      bool distinct = true;
      for (std::size_t i = 0; i < sk.size(); ++i) {
        CHECK_NOTHROW(check_combinatorics(inst, sk[i], mode));
        for (std::size_t j = 0; j < i; ++j) distinct = distinct && !(sk[i] == sk[j]);
      }
      CHECK(distinct);
      CHECK(sk == enumerate_skeletons(inst, {}, mode));
    }
  }

  in.graphs.push_back(make_graph(0, {{3, 1}, {4, 1}}, {{0, 1, 1.0}}, 1.0));
  in.n_drones = 3;
  CHECK_THROWS_AS(enumerate_skeletons(in, {}, SyncMode::Sync), LimitsExceededError);
  in.n_drones = 1;
  in.graphs[0] = make_graph(0, {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}},
                            {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}}, 1.0);
  CHECK_THROWS_AS(enumerate_skeletons(in, {}, SyncMode::Sync), LimitsExceededError);
  CHECK_NOTHROW(enumerate_skeletons(in, {2, 4, 2}, SyncMode::Sync));
}

TEST_CASE("all at the origin") {
  Instance in;
  in.origin = in.destination = {0, 0};
  in.v_m = 1;
  in.v_d = 2;
  in.endurance = 1;
  in.graphs.push_back(make_graph(0, {{0, 0}, {0, 0}}, {{0, 1, 1.0}}, 1.0));
  const auto r = solve_exact(in, SyncMode::Sync, {}, 1e-6);
  CHECK(std::abs(r.solution.objective) <= 1e-6);
  CHECK(grid_oracle(in, 0.02) == 0.0);
}

TEST_CASE("crossing edge against the oracle") {
  auto in = base(1);
  in.destination = {20, 0};
  in.endurance = 100;
  in.graphs.push_back(make_graph(0, {{10, -1}, {10, 1}}, {{0, 1, 1.0}}, 1.0));
  const double oracle = grid_oracle(in, 0.02);
  const auto sync = solve_exact(in, SyncMode::Sync, {}, 1e-6);
  CHECK(std::abs(sync.solution.objective - oracle) <= 1e-3 * oracle);
  CHECK(check_solution(in, sync.solution, 1e-6).pass());
  const auto async = solve_exact(in, SyncMode::Async, {}, 1e-6);
  CHECK(async.solution.objective <= sync.solution.objective + 1e-6);
}

TEST_CASE("suite instances") {
  for (int k : {2, 3, 9, 11, 14}) {
    CAPTURE(k);
    const auto in = suite::instance(k);
    const auto sync = solve_exact(in, SyncMode::Sync, {}, 1e-6);
    const auto async = solve_exact(in, SyncMode::Async, {}, 1e-6);
    CHECK(check_solution(in, sync.solution, 1e-6).pass());
    CHECK(check_solution(in, async.solution, 1e-6).pass());
    CHECK(async.solution.objective <= sync.solution.objective + 1e-6);
    CHECK(sync.solved <= sync.skeletons);
    CHECK(sync.skeleton.operations.size() == in.graphs.size());
    // The chosen skeleton reproduces the reported optimum.
    const double again = solve_fixed(in, sync.skeleton, SyncMode::Sync, 1e-6).solution.objective;
    CHECK(std::abs(again - sync.solution.objective) <= 1e-9 * (1 + again));
  }
}

TEST_CASE("tiny endurance is infeasible everywhere") {
  auto in = suite::instance(3);
  in.endurance = 1e-3;
  CHECK_THROWS_AS(solve_exact(in, SyncMode::Sync, {}, 1e-6), InfeasibleError);
  CHECK(std::isinf(grid_oracle(in, 0.02)));
}
