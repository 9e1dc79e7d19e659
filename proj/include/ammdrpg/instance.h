#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ammdrpg/geometry.h"

namespace ammdrpg {

enum class VisitMode { PerEdge, WholeGraph };

struct TargetEdge {
  int id = 0;  // index within its graph
  int from = 0;
  int to = 0;
  Segment segment;
  double alpha = 1.0;  // fraction of the edge to cover (PerEdge mode)

  double length() const { return edge_length(segment); }
};

struct TargetGraph {
  int id = 0;
  std::vector<Point> nodes;
  std::vector<TargetEdge> edges;
  double alpha = 1.0;  // fraction of total length to cover (WholeGraph mode)

  double total_length() const;
};

// Builds a graph from node coordinates and (from, to, alpha) triples; edge ids
// are assigned in input order and segments derived from the nodes.
struct EdgeSpec {
  int from;
  int to;
  double alpha;
};
TargetGraph make_graph(int id, std::vector<Point> nodes, const std::vector<EdgeSpec>& edges,
                       double alpha_graph);

struct Instance {
  Point origin;
  Point destination;
  std::vector<TargetGraph> graphs;
  int n_drones = 1;
  double v_m = 1.0;
  double v_d = 2.0;
  double endurance = 1.0;
  VisitMode visit_mode = VisitMode::PerEdge;

  const TargetGraph& graph_by_id(int id) const;
  std::size_t total_edges() const;
};

enum class InstanceViolationCode {
  NonFiniteValue,
  EmptyFleet,
  NonPositiveSpeed,
  NonPositiveEndurance,
  DuplicateGraphId,
  EdgeNodeOutOfRange,
  SelfLoopEdge,
  ZeroLengthEdge,
  AlphaOutOfRange,
  EmptyGraph,
  DisconnectedGraph,
};

std::string_view to_string(InstanceViolationCode code);

struct InstanceViolation {
  InstanceViolationCode code;
  std::string location;  // field path, e.g. "graphs[0].edges[2]"
};

std::vector<InstanceViolation> validate_instance(const Instance& instance);

// Instance file format v1. Coordinates are written with 17 significant digits
// so save/load round trips are exact.
std::string save_instance(const Instance& instance);
Instance load_instance(std::string_view text);

// FNV-1a hash of the saved form; solution files carry it to pin the instance.
std::uint64_t instance_fingerprint(const Instance& instance);

struct GridInstanceParams {
  std::uint64_t seed = 1;
  int n_graphs = 5;
  Box bbox{{0.0, 0.0}, {100.0, 100.0}};
  int n_drones = 1;
  double endurance = 20.0;
  VisitMode visit_mode = VisitMode::PerEdge;
  double v_m = 1.0;
  double min_cell_side = 1.0;
};

// Grid-graph generator: node counts cycle through 4, 6, 8, 10, 12 in graph-id
// order, each graph sits in its own cell of the bounding box, and v_d = 2 v_m.
Instance generate_grid_instance(const GridInstanceParams& params);

}  // namespace ammdrpg
