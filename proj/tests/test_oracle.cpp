#include <cmath>

#include "ammdrpg/error.h"
#include "ammdrpg/grid_oracle.h"
#include "doctest.h"
#include "suite.h"

using namespace ammdrpg;

TEST_CASE("no graphs means the straight line") {
  Instance in;
  in.origin = {1, 1};
  in.destination = {4, 5};
  CHECK(grid_oracle(in, 0.02) == doctest::Approx(5.0));
}

TEST_CASE("straight-line lower bound") {
  for (int k = 0; k < suite::kSize; k += 2) {
    const auto in = suite::instance(k);
    const double v = grid_oracle(in, 0.05);
    CHECK(v >= dist(in.origin, in.destination) - 0.05);
  }
}

TEST_CASE("refinement does not drift upwards") {
  for (int k : {0, 3, 8}) {
    const auto in = suite::instance(k);
    double prev = grid_oracle(in, 0.2);
    for (double r : {0.1, 0.05}) {
      const double v = grid_oracle(in, r);
      CHECK(v <= prev + 4 * r);
      prev = v;
    }
  }
}

TEST_CASE("edge on the straight line costs nothing extra") {
  Instance in;
  in.origin = {0, 0};
  in.destination = {10, 0};
  in.v_m = 1;
  in.v_d = 2;
  in.endurance = 20;
  in.graphs.push_back(make_graph(0, {{4, 0}, {6, 0}}, {{0, 1, 1.0}}, 1.0));
  CHECK(grid_oracle(in, 0.02) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("limits") {
  auto in = suite::instance(1);
  in.n_drones = 3;
  CHECK_THROWS_AS(grid_oracle(in, 0.02), LimitsExceededError);
  in = suite::instance(1);
  in.graphs.push_back(in.graphs[0]);
  in.graphs.back().id = 7;
  CHECK_THROWS_AS(grid_oracle(in, 0.02), LimitsExceededError);
  in = suite::instance(0);
  CHECK_THROWS_AS(grid_oracle(in, 0.0), std::invalid_argument);
}
