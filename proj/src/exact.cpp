#include "ammdrpg/exact.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ammdrpg/error.h"

namespace ammdrpg {

std::vector<std::vector<RouteStep>> enumerate_routes(const TargetGraph& g, VisitMode mode) {
  const int E = static_cast<int>(g.edges.size());
  int required = 0;
  if (mode == VisitMode::PerEdge) {
    for (const auto& e : g.edges) {
      if (e.alpha > 0.0) required |= 1 << e.id;
    }
  }
  const double need = mode == VisitMode::WholeGraph ? g.alpha * g.total_length() * (1.0 - 1e-12) : 0.0;
  std::vector<std::vector<RouteStep>> out;
  for (int mask = 1; mask < (1 << E); ++mask) {
    if ((mask & required) != required) continue;
    std::vector<int> edges;
    double length = 0.0;
    for (int e = 0; e < E; ++e) {
      if (mask >> e & 1) {
        edges.push_back(e);
        length += g.edges[static_cast<std::size_t>(e)].length();
      }
    }
    if (length < need) continue;
    const int k = static_cast<int>(edges.size());
    do {
      for (int dir = 0; dir < (1 << k); ++dir) {
        std::vector<RouteStep> route;
        for (int j = 0; j < k; ++j) route.push_back({edges[static_cast<std::size_t>(j)], !(dir >> j & 1)});
        out.push_back(std::move(route));
      }
    } while (std::next_permutation(edges.begin(), edges.end()));
  }
  return out;
}

namespace {

// Lowest-free-drone colouring of the stage intervals; false if the fleet is too small.
bool assign_drones(StageStructure& s, int n_drones) {
  const std::size_t G = s.launch.size();
  std::vector<std::size_t> order(G);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.launch[a] < s.launch[b]; });
  std::vector<int> busy_until(static_cast<std::size_t>(n_drones), 0);
  s.drone.assign(G, 0);
  for (std::size_t g : order) {
    int d = 0;
    while (d < n_drones && busy_until[static_cast<std::size_t>(d)] >= s.launch[g]) ++d;
    if (d == n_drones) return false;
    busy_until[static_cast<std::size_t>(d)] = s.retrieve[g];
    s.drone[g] = d + 1;
  }
  return true;
}

void structures_rec(std::size_t g, int T, SyncMode mode, int n_drones, StageStructure& cur,
                    std::vector<StageStructure>& out) {
  const std::size_t G = cur.launch.size();
  if (g == G) {
    std::vector<bool> event(static_cast<std::size_t>(T) + 1, false);
    for (std::size_t k = 0; k < G; ++k) {
      event[static_cast<std::size_t>(cur.launch[k])] = true;
      event[static_cast<std::size_t>(cur.retrieve[k])] = true;
    }
    for (int t = 1; t <= T; ++t) {
      if (!event[static_cast<std::size_t>(t)]) return;
    }
    StageStructure s = cur;
    if (assign_drones(s, n_drones)) out.push_back(std::move(s));
    return;
  }
  for (int a = 1; a <= T; ++a) {
    for (int b = a; b <= (mode == SyncMode::Sync ? a : T); ++b) {
      cur.launch[g] = a;
      cur.retrieve[g] = b;
      structures_rec(g + 1, T, mode, n_drones, cur, out);
    }
  }
}

void check_limits(const Instance& in, const ExactLimits& limits) {
  if (static_cast<int>(in.graphs.size()) > limits.max_graphs) {
    throw LimitsExceededError("exact solver: " + std::to_string(in.graphs.size()) + " graphs exceed the limit of " +
                              std::to_string(limits.max_graphs));
  }
  if (in.n_drones > limits.max_drones) {
    throw LimitsExceededError("exact solver: " + std::to_string(in.n_drones) + " drones exceed the limit of " +
                              std::to_string(limits.max_drones));
  }
  for (const auto& g : in.graphs) {
    if (static_cast<int>(g.edges.size()) > limits.max_edges) {
      throw LimitsExceededError("exact solver: graph " + std::to_string(g.id) + " has more than " +
                                std::to_string(limits.max_edges) + " edges");
    }
  }
}

FixedCombinatorics make_skeleton(const Instance& in, const StageStructure& s,
                                 const std::vector<std::vector<std::vector<RouteStep>>>& routes,
                                 const std::vector<std::size_t>& choice) {
  FixedCombinatorics f;
  f.n_stages = s.n_stages;
  for (std::size_t g = 0; g < in.graphs.size(); ++g) {
    f.operations.push_back({in.graphs[g].id, s.drone[g], s.launch[g], s.retrieve[g], routes[g][choice[g]]});
  }
  return f;
}

// Mixed-radix increment, last digit fastest; false after the final combination.
bool next_choice(std::vector<std::size_t>& choice, const std::vector<std::vector<std::vector<RouteStep>>>& routes) {
  for (std::size_t k = choice.size(); k-- > 0;) {
    if (++choice[k] < routes[k].size()) return true;
    choice[k] = 0;
  }
  return false;
}

}  // namespace

std::vector<StageStructure> enumerate_structures(const Instance& in, SyncMode mode) {
  std::vector<StageStructure> out;
  const std::size_t G = in.graphs.size();
  if (G == 0) {
    out.push_back({});
    return out;
  }
  for (int T = 1; T <= static_cast<int>(G); ++T) {
    StageStructure cur;
    cur.n_stages = T;
    cur.launch.assign(G, 0);
    cur.retrieve.assign(G, 0);
    structures_rec(0, T, mode, in.n_drones, cur, out);
  }
  return out;
}

void enumerate_skeletons(const Instance& in, const ExactLimits& limits, SyncMode mode,
                         const std::function<void(const FixedCombinatorics&)>& visit) {
  check_limits(in, limits);
  std::vector<std::vector<std::vector<RouteStep>>> routes;
  for (const auto& g : in.graphs) {
    routes.push_back(enumerate_routes(g, in.visit_mode));
    if (routes.back().empty()) return;  // coverage unattainable
  }
  for (const auto& s : enumerate_structures(in, mode)) {
    std::vector<std::size_t> choice(in.graphs.size(), 0);
    do {
      visit(make_skeleton(in, s, routes, choice));
    } while (next_choice(choice, routes));
  }
}

std::vector<FixedCombinatorics> enumerate_skeletons(const Instance& in, const ExactLimits& limits, SyncMode mode) {
  std::vector<FixedCombinatorics> out;
  enumerate_skeletons(in, limits, mode, [&](const FixedCombinatorics& f) { out.push_back(f); });
  return out;
}

ExactResult solve_exact(const Instance& in, SyncMode mode, const ExactLimits& limits, double tol) {
  check_limits(in, limits);
  const std::size_t G = in.graphs.size();
  std::vector<std::vector<std::vector<RouteStep>>> routes;
  for (const auto& g : in.graphs) routes.push_back(enumerate_routes(g, in.visit_mode));

  // Single-graph plans bound every skeleton from below: dropping all other
  // operations keeps the mothership path feasible and the triangle inequality
  // shortens it. Asynchronous windows may span several capacity-limited
  // stages, so their bound ignores capacity.
  const double floor = dist(in.origin, in.destination);
  std::vector<std::vector<double>> bound(G);
  for (std::size_t g = 0; g < G; ++g) {
    Instance single = in;
    single.graphs = {in.graphs[g]};
    single.n_drones = 1;
    if (mode == SyncMode::Async) {
      double scale = floor;
      for (const auto& gg : in.graphs) {
        for (const auto& n : gg.nodes) scale += dist(in.origin, n) + gg.total_length();
      }
      single.endurance = 1e3 * (1.0 + scale) * (1.0 / in.v_m + 1.0 / in.v_d);
    }
    for (const auto& route : routes[g]) {
      FixedCombinatorics f;
      f.n_stages = 1;
      f.operations.push_back({in.graphs[g].id, 1, 1, 1, route});
      double b = floor;
      try {
        b = std::max(b, solve_fixed(single, f, SyncMode::Sync, tol).solution.objective - 10.0 * tol * (1.0 + b));
      } catch (const InfeasibleError&) {
        b = INFINITY;
      } catch (const NonConvergedError&) {
      }
      bound[g].push_back(b);
    }
  }

  struct Candidate {
    double bound;
    std::size_t index;
    std::size_t structure;
    std::vector<std::size_t> choice;
  };
  std::vector<Candidate> cands;
  const auto structures = enumerate_structures(in, mode);
  ExactResult res;
  bool any_route = std::all_of(routes.begin(), routes.end(), [](const auto& r) { return !r.empty(); });
  if (any_route) {
    std::size_t index = 0;
    for (std::size_t s = 0; s < structures.size(); ++s) {
      std::vector<std::size_t> choice(G, 0);
      do {
        double b = floor;
        for (std::size_t g = 0; g < G; ++g) b = std::max(b, bound[g][choice[g]]);
        ++res.skeletons;
        if (std::isinf(b)) {
          ++res.infeasible;
        } else {
          cands.push_back({b, index, s, choice});
        }
        ++index;
      } while (next_choice(choice, routes));
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.bound != b.bound ? a.bound < b.bound : a.index < b.index;
  });

  double best = INFINITY;
  std::size_t best_index = 0;
  for (const auto& c : cands) {
    if (c.bound > best + 1e-9 * (1.0 + best)) break;
    const auto f = make_skeleton(in, structures[c.structure], routes, c.choice);
    ++res.solved;
    try {
      auto sol = solve_fixed(in, f, mode, tol);
      const double v = sol.solution.objective;
      const double eps = 1e-9 * (1.0 + std::abs(best));
      if (std::isinf(best) || v < best - eps || (v <= best + eps && c.index < best_index)) {
        best = v;
        best_index = c.index;
        res.solution = std::move(sol.solution);
        res.skeleton = f;
      }
    } catch (const InfeasibleError&) {
      ++res.infeasible;
    } catch (const NonConvergedError&) {
      ++res.failed;
    }
  }
  if (std::isinf(best)) {
    throw InfeasibleError("exact solver: no skeleton admits a feasible plan");
  }
  return res;
}

}  // namespace ammdrpg
