#include "ammdrpg/instance.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "ammdrpg/error.h"
#include "ammdrpg/random.h"
#include "ammdrpg/text.h"

namespace ammdrpg {

double TargetGraph::total_length() const {
  double total = 0.0;
  for (const auto& e : edges) {
    total += e.length();
  }
  return total;
}

TargetGraph make_graph(int id, std::vector<Point> nodes, const std::vector<EdgeSpec>& edges,
                       double alpha_graph) {
  TargetGraph g;
  g.id = id;
  g.nodes = std::move(nodes);
  g.alpha = alpha_graph;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& spec = edges[k];
    TargetEdge e;
    e.id = static_cast<int>(k);
    e.from = spec.from;
    e.to = spec.to;
    e.alpha = spec.alpha;
    const auto n = static_cast<int>(g.nodes.size());
    if (spec.from >= 0 && spec.from < n && spec.to >= 0 && spec.to < n) {
      e.segment = {g.nodes[spec.from], g.nodes[spec.to]};
    }
    g.edges.push_back(e);
  }
  return g;
}

const TargetGraph& Instance::graph_by_id(int id) const {
  for (const auto& g : graphs) {
    if (g.id == id) {
      return g;
    }
  }
  throw std::out_of_range("no graph with id " + std::to_string(id));
}

std::size_t Instance::total_edges() const {
  std::size_t n = 0;
  for (const auto& g : graphs) {
    n += g.edges.size();
  }
  return n;
}

std::string_view to_string(InstanceViolationCode code) {
  switch (code) {
    case InstanceViolationCode::NonFiniteValue: return "NonFiniteValue";
    case InstanceViolationCode::EmptyFleet: return "EmptyFleet";
    case InstanceViolationCode::NonPositiveSpeed: return "NonPositiveSpeed";
    case InstanceViolationCode::NonPositiveEndurance: return "NonPositiveEndurance";
    case InstanceViolationCode::DuplicateGraphId: return "DuplicateGraphId";
    case InstanceViolationCode::EdgeNodeOutOfRange: return "EdgeNodeOutOfRange";
    case InstanceViolationCode::SelfLoopEdge: return "SelfLoopEdge";
    case InstanceViolationCode::ZeroLengthEdge: return "ZeroLengthEdge";
    case InstanceViolationCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case InstanceViolationCode::EmptyGraph: return "EmptyGraph";
    case InstanceViolationCode::DisconnectedGraph: return "DisconnectedGraph";
  }
  return "Unknown";
}

namespace {

bool finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

bool connected(const TargetGraph& g) {
  const auto n = g.nodes.size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) {
      a = parent[a] = parent[parent[a]];
    }
    return a;
  };
  for (const auto& e : g.edges) {
    parent[find(e.from)] = find(e.to);
  }
  // Only nodes incident to an edge count; isolated nodes carry no coverage.
  std::set<int> roots;
  for (const auto& e : g.edges) {
    roots.insert(find(e.from));
  }
  return roots.size() <= 1;
}

}  // namespace

std::vector<InstanceViolation> validate_instance(const Instance& instance) {
  using Code = InstanceViolationCode;
  std::vector<InstanceViolation> out;
  if (!finite(instance.origin)) out.push_back({Code::NonFiniteValue, "origin"});
  if (!finite(instance.destination)) out.push_back({Code::NonFiniteValue, "destination"});
  if (instance.n_drones < 1) out.push_back({Code::EmptyFleet, "fleet.drones"});
  if (!(instance.v_m > 0.0) || !std::isfinite(instance.v_m)) {
    out.push_back({Code::NonPositiveSpeed, "fleet.v_m"});
  }
  if (!(instance.v_d > 0.0) || !std::isfinite(instance.v_d)) {
    out.push_back({Code::NonPositiveSpeed, "fleet.v_d"});
  }
  if (!(instance.endurance > 0.0) || !std::isfinite(instance.endurance)) {
    out.push_back({Code::NonPositiveEndurance, "fleet.endurance"});
  }

  std::set<int> ids;
  for (std::size_t gi = 0; gi < instance.graphs.size(); ++gi) {
    const auto& g = instance.graphs[gi];
    const std::string gpath = "graphs[" + std::to_string(gi) + "]";
    if (!ids.insert(g.id).second) out.push_back({Code::DuplicateGraphId, gpath + ".id"});
    if (!(g.alpha >= 0.0 && g.alpha <= 1.0)) {
      out.push_back({Code::AlphaOutOfRange, gpath + ".alpha"});
    }
    for (std::size_t ni = 0; ni < g.nodes.size(); ++ni) {
      if (!finite(g.nodes[ni])) {
        out.push_back({Code::NonFiniteValue, gpath + ".nodes[" + std::to_string(ni) + "]"});
      }
    }
    if (g.edges.empty()) {
      out.push_back({Code::EmptyGraph, gpath + ".edges"});
      continue;
    }
    bool indices_ok = true;
    const auto n = static_cast<int>(g.nodes.size());
    for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
      const auto& e = g.edges[ei];
      const std::string epath = gpath + ".edges[" + std::to_string(ei) + "]";
      if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
        out.push_back({Code::EdgeNodeOutOfRange, epath});
        indices_ok = false;
        continue;
      }
      if (e.from == e.to) {
        out.push_back({Code::SelfLoopEdge, epath});
      } else if (!(e.length() > 0.0)) {
        out.push_back({Code::ZeroLengthEdge, epath});
      }
      if (!(e.alpha >= 0.0 && e.alpha <= 1.0)) {
        out.push_back({Code::AlphaOutOfRange, epath + ".alpha"});
      }
    }
    if (indices_ok && !connected(g)) {
      out.push_back({Code::DisconnectedGraph, gpath});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

constexpr const char* kInstanceHeader = "ammdrpg-instance";

std::string mode_token(VisitMode m) { return m == VisitMode::PerEdge ? "edge" : "graph"; }

}  // namespace

std::string save_instance(const Instance& in) {
  using text::fmt;
  std::ostringstream out;
  out << kInstanceHeader << " v1\n";
  out << "origin " << fmt(in.origin.x) << ' ' << fmt(in.origin.y) << '\n';
  out << "destination " << fmt(in.destination.x) << ' ' << fmt(in.destination.y) << '\n';
  out << "fleet\n";
  out << "  drones " << in.n_drones << '\n';
  out << "  v_m " << fmt(in.v_m) << '\n';
  out << "  v_d " << fmt(in.v_d) << '\n';
  out << "  endurance " << fmt(in.endurance) << '\n';
  out << "end\n";
  out << "visit " << mode_token(in.visit_mode) << '\n';
  out << "graphs " << in.graphs.size() << '\n';
  for (const auto& g : in.graphs) {
    out << "graph " << g.id << '\n';
    out << "  alpha " << fmt(g.alpha) << '\n';
    out << "  nodes " << g.nodes.size() << '\n';
    for (const auto& p : g.nodes) {
      out << "    node " << fmt(p.x) << ' ' << fmt(p.y) << '\n';
    }
    out << "  edges " << g.edges.size() << '\n';
    for (const auto& e : g.edges) {
      out << "    edge " << e.from << ' ' << e.to << ' ' << fmt(e.alpha) << '\n';
    }
    out << "end\n";
  }
  return out.str();
}

namespace {

Point read_point(text::Reader& r, const std::string& key, const std::string& path) {
  const auto v = r.expect(key, path, 2);
  return {text::parse_double(v[0], path + ".x"), text::parse_double(v[1], path + ".y")};
}

double read_scalar(text::Reader& r, const std::string& key, const std::string& path) {
  return text::parse_double(r.expect(key, path, 1)[0], path);
}

std::size_t read_count(text::Reader& r, const std::string& key, const std::string& path) {
  const long n = text::parse_int(r.expect(key, path, 1)[0], path);
  if (n < 0) {
    throw FormatError(path, "negative count");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

Instance load_instance(std::string_view doc) {
  text::Reader r(doc);
  if (r.done()) {
    throw FormatError("header", "empty document");
  }
  const auto header = r.next();
  if (header.size() != 2 || header[0] != kInstanceHeader) {
    throw FormatError("header", "expected 'ammdrpg-instance v1'");
  }
  if (header[1] != "v1") {
    throw FormatError("header", "unknown version '" + header[1] + "'");
  }

  Instance in;
  in.origin = read_point(r, "origin", "origin");
  in.destination = read_point(r, "destination", "destination");
  r.expect("fleet", "fleet", 0);
  in.n_drones = static_cast<int>(text::parse_int(r.expect("drones", "fleet.drones", 1)[0], "fleet.drones"));
  in.v_m = read_scalar(r, "v_m", "fleet.v_m");
  in.v_d = read_scalar(r, "v_d", "fleet.v_d");
  in.endurance = read_scalar(r, "endurance", "fleet.endurance");
  r.expect("end", "fleet.end", 0);

  const auto mode = r.expect("visit", "visit", 1)[0];
  if (mode == "edge") {
    in.visit_mode = VisitMode::PerEdge;
  } else if (mode == "graph") {
    in.visit_mode = VisitMode::WholeGraph;
  } else {
    throw FormatError("visit", "expected 'edge' or 'graph', got '" + mode + "'");
  }

  const std::size_t n_graphs = read_count(r, "graphs", "graphs");
  for (std::size_t gi = 0; gi < n_graphs; ++gi) {
    const std::string gpath = "graphs[" + std::to_string(gi) + "]";
    const int id = static_cast<int>(text::parse_int(r.expect("graph", gpath, 1)[0], gpath + ".id"));
    const double alpha = read_scalar(r, "alpha", gpath + ".alpha");
    const std::size_t n_nodes = read_count(r, "nodes", gpath + ".nodes");
    std::vector<Point> nodes;
    for (std::size_t k = 0; k < n_nodes; ++k) {
      nodes.push_back(read_point(r, "node", gpath + ".nodes[" + std::to_string(k) + "]"));
    }
    const std::size_t n_edges = read_count(r, "edges", gpath + ".edges");
    std::vector<EdgeSpec> edges;
    for (std::size_t k = 0; k < n_edges; ++k) {
      const std::string epath = gpath + ".edges[" + std::to_string(k) + "]";
      const auto v = r.expect("edge", epath, 3);
      edges.push_back({static_cast<int>(text::parse_int(v[0], epath + ".from")),
                       static_cast<int>(text::parse_int(v[1], epath + ".to")),
                       text::parse_double(v[2], epath + ".alpha")});
    }
    r.expect("end", gpath + ".end", 0);
    in.graphs.push_back(make_graph(id, std::move(nodes), edges, alpha));
  }
  if (!r.done()) {
    throw FormatError("<document>", "trailing content at line " + std::to_string(r.line_number()));
  }

  const auto violations = validate_instance(in);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw FormatError(v.location, "invariant violated: " + std::string(to_string(v.code)));
  }
  return in;
}

std::uint64_t instance_fingerprint(const Instance& instance) {
  return text::fnv1a(save_instance(instance));
}

// ---------------------------------------------------------------------------
// grid generator

namespace {

struct GridShape {
  int rows;
  int cols;
};

GridShape shape_for(int n_nodes) {
  switch (n_nodes) {
    case 4: return {2, 2};
    case 6: return {2, 3};
    case 8: return {2, 4};
    case 10: return {2, 5};
    default: return {3, 4};
  }
}

TargetGraph grid_graph(int id, int n_nodes, const Box& cell, Rng& rng) {
  auto shape = shape_for(n_nodes);
  if (rng.uniform() < 0.5) {
    std::swap(shape.rows, shape.cols);
  }
  const double margin = 0.15;
  const double span_x = cell.width() * (1.0 - 2.0 * margin);
  const double span_y = cell.height() * (1.0 - 2.0 * margin);
  const double spacing = std::min(span_x / (shape.cols - 1), span_y / (shape.rows - 1));
  const double used_x = spacing * (shape.cols - 1);
  const double used_y = spacing * (shape.rows - 1);
  const Point corner{cell.lo.x + margin * cell.width() + rng.uniform() * (span_x - used_x),
                     cell.lo.y + margin * cell.height() + rng.uniform() * (span_y - used_y)};

  std::vector<Point> nodes;
  for (int r = 0; r < shape.rows; ++r) {
    for (int c = 0; c < shape.cols; ++c) {
      nodes.push_back({corner.x + c * spacing, corner.y + r * spacing});
    }
  }
  auto index = [&](int r, int c) { return r * shape.cols + c; };
  std::vector<std::pair<int, int>> candidates;
  for (int r = 0; r < shape.rows; ++r) {
    for (int c = 0; c < shape.cols; ++c) {
      if (c + 1 < shape.cols) candidates.emplace_back(index(r, c), index(r, c + 1));
      if (r + 1 < shape.rows) candidates.emplace_back(index(r, c), index(r + 1, c));
    }
  }
  rng.shuffle(candidates);

  // Random spanning tree (Kruskal over shuffled grid edges), then each
  // remaining grid edge with probability 1/2.
  std::vector<int> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) {
      a = parent[a] = parent[parent[a]];
    }
    return a;
  };
  std::vector<std::pair<int, int>> chosen;
  std::vector<std::pair<int, int>> rest;
  for (const auto& [a, b] : candidates) {
    const int ra = find(a);
    const int rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      chosen.emplace_back(a, b);
    } else {
      rest.emplace_back(a, b);
    }
  }
  for (const auto& e : rest) {
    if (rng.uniform() < 0.5) {
      chosen.push_back(e);
    }
  }
  std::sort(chosen.begin(), chosen.end());

  const double alpha_graph = 1.0 - rng.uniform();  // (0, 1]
  std::vector<EdgeSpec> edges;
  for (const auto& [a, b] : chosen) {
    edges.push_back({a, b, 1.0 - rng.uniform()});
  }
  return make_graph(id, std::move(nodes), edges, alpha_graph);
}

}  // namespace

Instance generate_grid_instance(const GridInstanceParams& p) {
  if (p.n_graphs < 1) {
    throw std::invalid_argument("generate_grid_instance: n_graphs must be >= 1");
  }
  if (!(p.bbox.width() > 0.0 && p.bbox.height() > 0.0)) {
    throw std::invalid_argument("generate_grid_instance: degenerate bounding box");
  }
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p.n_graphs))));
  const int rows = (p.n_graphs + cols - 1) / cols;
  const double cell_w = p.bbox.width() / cols;
  const double cell_h = p.bbox.height() / rows;
  if (std::min(cell_w, cell_h) < p.min_cell_side) {
    throw std::invalid_argument("generate_grid_instance: bounding box too small for " +
                                std::to_string(p.n_graphs) + " disjoint cells");
  }

  Rng rng(p.seed);
  std::vector<int> cells(static_cast<std::size_t>(rows * cols));
  std::iota(cells.begin(), cells.end(), 0);
  rng.shuffle(cells);

  static constexpr int kNodeMix[] = {4, 6, 8, 10, 12};
  Instance in;
  in.origin = p.bbox.lo;
  in.destination = {p.bbox.hi.x, p.bbox.lo.y};
  in.n_drones = p.n_drones;
  in.v_m = p.v_m;
  in.v_d = 2.0 * p.v_m;
  in.endurance = p.endurance;
  in.visit_mode = p.visit_mode;
  for (int gi = 0; gi < p.n_graphs; ++gi) {
    const int cell = cells[static_cast<std::size_t>(gi)];
    const int r = cell / cols;
    const int c = cell % cols;
    const Box box{{p.bbox.lo.x + c * cell_w, p.bbox.lo.y + r * cell_h},
                  {p.bbox.lo.x + (c + 1) * cell_w, p.bbox.lo.y + (r + 1) * cell_h}};
    in.graphs.push_back(grid_graph(gi, kNodeMix[gi % 5], box, rng));
  }
  return in;
}

}  // namespace ammdrpg
