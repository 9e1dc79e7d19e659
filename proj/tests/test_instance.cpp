#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "ammdrpg/error.h"
#include "ammdrpg/instance.h"
#include "doctest.h"

using namespace ammdrpg;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

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

bool has(const std::vector<InstanceViolation>& v, InstanceViolationCode c) {
  return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.code == c; });
}

}  // namespace

TEST_CASE("generator node mix and determinism") {
  GridInstanceParams p;
  p.seed = 1;
  p.n_graphs = 5;
  const auto a = generate_grid_instance(p);
  std::vector<std::size_t> counts;
  for (const auto& g : a.graphs) counts.push_back(g.nodes.size());
  std::sort(counts.begin(), counts.end());
  CHECK(counts == std::vector<std::size_t>{4, 6, 8, 10, 12});
  CHECK(save_instance(a) == save_instance(generate_grid_instance(p)));
  CHECK(a.v_d == 2.0 * a.v_m);

  p.n_graphs = 10;
  const auto b = generate_grid_instance(p);
  std::map<std::size_t, int> hist;
  for (const auto& g : b.graphs) ++hist[g.nodes.size()];
  for (int n : {4, 6, 8, 10, 12}) CHECK(hist[n] == 2);
}

TEST_CASE("generated graphs are valid, connected and cell-disjoint") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GridInstanceParams p;
    p.seed = seed;
    p.n_graphs = 1 + static_cast<int>(seed % 9);
    const auto in = generate_grid_instance(p);
    CHECK(validate_instance(in).empty());
    std::vector<Box> boxes;
    for (const auto& g : in.graphs) {
      CHECK(g.alpha > 0.0);
      CHECK(g.alpha <= 1.0);
      Box b{g.nodes[0], g.nodes[0]};
      for (const auto& n : g.nodes) {
        b.lo = {std::min(b.lo.x, n.x), std::min(b.lo.y, n.y)};
        b.hi = {std::max(b.hi.x, n.x), std::max(b.hi.y, n.y)};
      }
      for (const auto& e : g.edges) {
        CHECK(e.alpha > 0.0);
        CHECK(e.alpha <= 1.0);
      }
      for (const auto& o : boxes) {
        const bool overlap = b.lo.x <= o.hi.x && o.lo.x <= b.hi.x && b.lo.y <= o.hi.y && o.lo.y <= b.hi.y;
        CHECK_FALSE(overlap);
      }
      boxes.push_back(b);
    }
  }
}

TEST_CASE("generator rejects bad parameters") {
  GridInstanceParams p;
  p.n_graphs = 0;
  CHECK_THROWS_AS(generate_grid_instance(p), std::invalid_argument);
  p.n_graphs = 100;
  p.bbox = {{0, 0}, {5, 5}};
  CHECK_THROWS_AS(generate_grid_instance(p), std::invalid_argument);
  p.bbox = {{0, 0}, {0, 5}};
  CHECK_THROWS_AS(generate_grid_instance(p), std::invalid_argument);
}

TEST_CASE("save/load round trip") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GridInstanceParams p;
    p.seed = seed;
    p.n_graphs = 3;
    p.visit_mode = seed % 2 ? VisitMode::PerEdge : VisitMode::WholeGraph;
    const auto in = generate_grid_instance(p);
    const auto text = save_instance(in);
    const auto back = load_instance(text);
    CHECK(save_instance(back) == text);
    CHECK(back.graphs[1].nodes[2] == in.graphs[1].nodes[2]);
    CHECK(instance_fingerprint(back) == instance_fingerprint(in));
  }
}

TEST_CASE("loader reports field paths") {
  const auto text = save_instance(tiny());
  auto drop = [&](const std::string& key) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
      if (line.find(key) == std::string::npos) out += line + "\n";
    }
    return out;
  };
  try {
    load_instance(drop("v_d"));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.path() == "fleet.v_d");
  }
  try {
    load_instance(drop("ammdrpg-instance"));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.path() == "header");
  }
  std::string v2 = text;
  v2.replace(v2.find("v1"), 2, "v2");
  CHECK_THROWS_WITH_AS(load_instance(v2), doctest::Contains("unknown version"), FormatError);

  std::string bad = text;
  bad.replace(bad.find("drones 1"), 8, "drones 0");
  try {
    load_instance(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.path() == "fleet.drones");
  }
  CHECK_THROWS_AS(load_instance(text + "extra 1\n"), FormatError);
  CHECK_THROWS_AS(load_instance(""), FormatError);
}

TEST_CASE("case-study shape loads") {
  const auto in = load_instance(slurp(AMMDRPG_FIXTURES "/case_study_shape.inst"));
  CHECK(in.graphs.size() == 6);
  CHECK(in.n_drones == 3);
  CHECK(in.v_d == 100);
  CHECK(in.v_m == 50);
  CHECK(in.endurance == 2);
  CHECK(in.visit_mode == VisitMode::WholeGraph);
  for (const auto& g : in.graphs) CHECK(g.alpha == 1.0);
}

TEST_CASE("validate_instance codes") {
  CHECK(validate_instance(tiny()).empty());

  auto in = tiny();
  in.graphs[0] = make_graph(0, {{1, 1}, {1, 1}}, {{0, 1, 1.0}}, 1.0);
  CHECK(has(validate_instance(in), InstanceViolationCode::ZeroLengthEdge));

  in = tiny();
  in.n_drones = 0;
  const auto v = validate_instance(in);
  REQUIRE(v.size() == 1);
  CHECK(v[0].code == InstanceViolationCode::EmptyFleet);

  in = tiny();
  in.v_d = 0;
  CHECK(has(validate_instance(in), InstanceViolationCode::NonPositiveSpeed));
  in = tiny();
  in.endurance = -1;
  CHECK(has(validate_instance(in), InstanceViolationCode::NonPositiveEndurance));
  in = tiny();
  in.graphs.push_back(in.graphs[0]);
  CHECK(has(validate_instance(in), InstanceViolationCode::DuplicateGraphId));
  in = tiny();
  in.graphs[0] = make_graph(0, {{0, 0}, {1, 0}}, {{0, 2, 1.0}}, 1.0);
  CHECK(has(validate_instance(in), InstanceViolationCode::EdgeNodeOutOfRange));
  in = tiny();
  in.graphs[0] = make_graph(0, {{0, 0}, {1, 0}}, {{0, 0, 1.0}}, 1.0);
  CHECK(has(validate_instance(in), InstanceViolationCode::SelfLoopEdge));
  in = tiny();
  in.graphs[0].edges[0].alpha = 1.5;
  CHECK(has(validate_instance(in), InstanceViolationCode::AlphaOutOfRange));
  in = tiny();
  in.graphs[0].edges.clear();
  CHECK(has(validate_instance(in), InstanceViolationCode::EmptyGraph));
  in = tiny();
  in.graphs[0] = make_graph(0, {{0, 0}, {1, 0}, {5, 5}, {6, 5}}, {{0, 1, 1.0}, {2, 3, 1.0}}, 1.0);
  CHECK(has(validate_instance(in), InstanceViolationCode::DisconnectedGraph));
  in = tiny();
  in.origin.x = std::nan("");
  CHECK(has(validate_instance(in), InstanceViolationCode::NonFiniteValue));
}
