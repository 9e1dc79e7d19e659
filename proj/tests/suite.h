#pragma once

// Seeded tiny instances inside the exact-solver limits. Coverage fractions
// sit on multiples of 0.02 so the oracle's 1/50 lattice represents them
// exactly.

#include <cmath>
#include <vector>

#include "ammdrpg/instance.h"
#include "ammdrpg/random.h"

namespace suite {

inline double quantise(double a) { return std::round(a * 50.0) / 50.0; }

inline ammdrpg::TargetGraph random_graph(int id, int n_edges, ammdrpg::Point anchor, bool equal_lengths,
                                         ammdrpg::Rng& rng) {
  using ammdrpg::Point;
  std::vector<Point> nodes{anchor};
  std::vector<ammdrpg::EdgeSpec> edges;
  const double base = rng.uniform(0.8, 1.6);
  for (int k = 0; k < n_edges; ++k) {
    // Grow a path or a star from a random existing node.
    const int from = static_cast<int>(rng.below(nodes.size()));
    const double ang = rng.uniform(0.0, 6.283185307179586);
    const double len = equal_lengths ? base : rng.uniform(0.6, 1.8);
    nodes.push_back(nodes[static_cast<std::size_t>(from)] + len * Point{std::cos(ang), std::sin(ang)});
    edges.push_back({from, static_cast<int>(nodes.size()) - 1, quantise(rng.uniform(0.2, 1.0))});
  }
  return ammdrpg::make_graph(id, nodes, edges, quantise(rng.uniform(0.2, 0.9)));
}

// Instance k of the suite: graph count, drone count, edge counts and visit
// mode cycle with k; geometry and fractions come from the seed.
inline ammdrpg::Instance instance(int k) {
  ammdrpg::Rng rng(1000 + static_cast<std::uint64_t>(k));
  ammdrpg::Instance in;
  in.origin = {0, 0};
  in.destination = {rng.uniform(6.0, 10.0), rng.uniform(-2.0, 2.0)};
  in.v_m = 1.0;
  in.v_d = rng.uniform(1.5, 3.0);
  in.n_drones = 1 + (k / 2) % 2;
  in.visit_mode = k % 5 == 4 ? ammdrpg::VisitMode::WholeGraph : ammdrpg::VisitMode::PerEdge;
  const int n_graphs = 1 + k % 2;
  for (int g = 0; g < n_graphs; ++g) {
    int n_edges = 1 + (k + g) % 3;
    if (in.visit_mode == ammdrpg::VisitMode::WholeGraph) n_edges = std::min(n_edges, 2);
    const ammdrpg::Point anchor{rng.uniform(1.5, 8.5), rng.uniform(-3.0, 3.0)};
    in.graphs.push_back(random_graph(g, n_edges, anchor, in.visit_mode == ammdrpg::VisitMode::WholeGraph, rng));
  }
  in.endurance = rng.uniform(4.0, 9.0);
  return in;
}

inline constexpr int kSize = 20;

}  // namespace suite
