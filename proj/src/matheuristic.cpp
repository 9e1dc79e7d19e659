#include "ammdrpg/matheuristic.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ammdrpg/error.h"
#include "ammdrpg/random.h"
#include "ammdrpg/text.h"
#include "ammdrpg/validate.h"

namespace ammdrpg {

namespace {

constexpr double kSlack = 1e-9;

struct Choice {
  int edge;
  double fraction;
};

// Sets directions greedily from `start` and fills the entry/exit data.
DroneTour realise(const TargetGraph& g, const std::vector<Choice>& order, Point start) {
  DroneTour t;
  t.graph = g.id;
  Point cur = start;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& e = g.edges[static_cast<std::size_t>(order[k].edge)];
    const double f = order[k].fraction;
    EdgeVisit v;
    v.edge = order[k].edge;
    v.forward = dist(cur, e.segment.b) <= dist(cur, e.segment.c);
    v.rho = v.forward ? 0.0 : 1.0;
    v.lambda = v.forward ? f : 1.0 - f;
    const Point in = lerp(e.segment, v.rho);
    if (k == 0) {
      t.entry = in;
    } else {
      t.interior_length += dist(cur, in);
    }
    cur = lerp(e.segment, v.lambda);
    t.interior_length += f * e.length();
    t.visits.push_back(v);
  }
  t.entry_edge = order.front().edge;
  t.exit_edge = order.back().edge;
  t.exit = cur;
  return t;
}

double flight(const DroneTour& t, Point p) { return dist(p, t.entry) + t.interior_length + dist(t.exit, p); }

// Minimises the worst member flight time over P by normalised subgradient steps.
std::pair<Point, double> meeting_point(const Instance& in, const std::map<int, DroneTour>& tours,
                                       const std::vector<int>& members) {
  std::vector<Point> pts;
  for (int g : members) {
    pts.push_back(tours.at(g).entry);
    pts.push_back(tours.at(g).exit);
  }
  Point p{0, 0};
  for (const auto& q : pts) p = p + q;
  p = (1.0 / static_cast<double>(pts.size())) * p;
  double spread = 0.0;
  for (const auto& a : pts) {
    for (const auto& b : pts) spread = std::max(spread, dist(a, b));
  }
  Point best = p;
  double best_v = cluster_time(in, tours, members, p);
  for (int k = 0; k < 200; ++k) {
    const DroneTour* worst = nullptr;
    double wv = -1.0;
    for (int g : members) {
      const double v = flight(tours.at(g), p);
      if (v > wv) {
        wv = v;
        worst = &tours.at(g);
      }
    }
    Point grad{0, 0};
    for (const Point q : {worst->entry, worst->exit}) {
      const double r = dist(p, q);
      if (r > 0) grad = grad + (1.0 / r) * (p - q);
    }
    const double n = norm(grad);
    if (n < 1e-12) break;
    p = p - (0.5 * spread / std::sqrt(k + 1.0) / n) * grad;
    const double v = cluster_time(in, tours, members, p);
    if (v < best_v) {
      best_v = v;
      best = p;
    }
  }
  return {best, best_v};
}

}  // namespace

DroneTour step1_drone_tour(const TargetGraph& g, Point anchor, VisitMode mode) {
  const int n = static_cast<int>(g.edges.size());
  if (n == 0) throw std::invalid_argument("step1_drone_tour: graph has no edges");
  auto nearest = [&] {
    int best = 0;
    for (int e = 1; e < n; ++e) {
      if (point_segment_distance(anchor, g.edges[static_cast<std::size_t>(e)].segment) <
          point_segment_distance(anchor, g.edges[static_cast<std::size_t>(best)].segment)) {
        best = e;
      }
    }
    return best;
  };

  std::vector<Choice> chosen;
  if (mode == VisitMode::PerEdge) {
    for (const auto& e : g.edges) {
      if (e.alpha > 0) chosen.push_back({e.id, e.alpha});
    }
  } else {
    std::vector<int> by_length(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) by_length[static_cast<std::size_t>(e)] = e;
    std::stable_sort(by_length.begin(), by_length.end(), [&](int a, int b) {
      return g.edges[static_cast<std::size_t>(a)].length() > g.edges[static_cast<std::size_t>(b)].length();
    });
    double need = g.alpha * g.total_length();
    for (int e : by_length) {
      const double len = g.edges[static_cast<std::size_t>(e)].length();
      if (need <= 0 || len <= 0) break;
      const double f = std::min(1.0, need / len);
      chosen.push_back({e, f});
      need -= f * len;
    }
  }
  if (chosen.empty()) chosen.push_back({nearest(), 0.0});

  auto mid = [&](const Choice& c) {
    const auto& s = g.edges[static_cast<std::size_t>(c.edge)].segment;
    return lerp(s, 0.5);
  };
  // Nearest insertion over edge midpoints, seeded at the edge closest to the anchor.
  std::vector<Choice> order, rest;
  std::size_t seed = 0;
  for (std::size_t k = 1; k < chosen.size(); ++k) {
    if (point_segment_distance(anchor, g.edges[static_cast<std::size_t>(chosen[k].edge)].segment) <
        point_segment_distance(anchor, g.edges[static_cast<std::size_t>(chosen[seed].edge)].segment)) {
      seed = k;
    }
  }
  order.push_back(chosen[seed]);
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    if (k != seed) rest.push_back(chosen[k]);
  }
  while (!rest.empty()) {
    std::size_t pick = 0;
    double pick_d = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rest.size(); ++r) {
      for (const auto& o : order) {
        const double d = dist(mid(rest[r]), mid(o));
        if (d < pick_d) {
          pick_d = d;
          pick = r;
        }
      }
    }
    const Point m = mid(rest[pick]);
    std::size_t at = 0;
    double at_cost = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p <= order.size(); ++p) {
      double c = 0;
      if (p > 0) c += dist(mid(order[p - 1]), m);
      if (p < order.size()) c += dist(m, mid(order[p]));
      if (p > 0 && p < order.size()) c -= dist(mid(order[p - 1]), mid(order[p]));
      if (c < at_cost) {
        at_cost = c;
        at = p;
      }
    }
    order.insert(order.begin() + static_cast<std::ptrdiff_t>(at), rest[pick]);
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  auto cost = [&](const std::vector<Choice>& o) { return flight(realise(g, o, anchor), anchor); };
  // Deterministic 2-opt on the edge order.
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t i = 0; i + 1 < order.size() && !improved; ++i) {
      for (std::size_t j = i + 1; j < order.size() && !improved; ++j) {
        auto trial = order;
        std::reverse(trial.begin() + static_cast<std::ptrdiff_t>(i), trial.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        if (cost(trial) < cost(order) - 1e-12) {
          order = std::move(trial);
          improved = true;
        }
      }
    }
  }
  // Rotation whose entry and exit sit closest to the anchor.
  auto best = order;
  for (std::size_t r = 1; r < order.size(); ++r) {
    auto trial = order;
    std::rotate(trial.begin(), trial.begin() + static_cast<std::ptrdiff_t>(r), trial.end());
    if (cost(trial) < cost(best) - 1e-12) best = std::move(trial);
  }
  return realise(g, best, anchor);
}

double cluster_time(const Instance& in, const std::map<int, DroneTour>& tours, const std::vector<int>& members,
                    Point p) {
  double worst = 0.0;
  for (int g : members) worst = std::max(worst, flight(tours.at(g), p) / in.v_d);
  return worst;
}

Clustering step2_cluster(const Instance& in, const std::map<int, DroneTour>& tours, std::uint64_t seed, int maxit,
                         bool strict_fleet) {
  if (maxit < 1) throw std::invalid_argument("step2_cluster: maxit must be at least 1");
  Clustering c;
  for (const auto& g : in.graphs) {
    const auto [p, time] = meeting_point(in, tours, {g.id});
    if (time > in.endurance + kSlack) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "graph %d cannot be flown within the drone endurance", g.id);
      throw InfeasibleError(msg, g.id);
    }
    c.clusters.push_back({g.id});
    c.meeting.push_back(p);
  }
  Rng rng(seed);
  for (int it = 0; it < maxit && c.clusters.size() >= 2; ++it) {
    const std::size_t n = c.clusters.size();
    std::size_t a = rng.below(n), b = rng.below(n - 1);
    if (b >= a) ++b;
    if (a > b) std::swap(a, b);
    const std::size_t size = c.clusters[a].size() + c.clusters[b].size();
    const auto fleet = static_cast<std::size_t>(in.n_drones);
    if (strict_fleet ? size >= fleet : size > fleet) continue;
    auto merged = c.clusters[a];
    merged.insert(merged.end(), c.clusters[b].begin(), c.clusters[b].end());
    std::sort(merged.begin(), merged.end());
    const auto [p, time] = meeting_point(in, tours, merged);
    if (time > in.endurance + kSlack) continue;
    c.clusters[a] = std::move(merged);
    c.meeting[a] = p;
    c.clusters.erase(c.clusters.begin() + static_cast<std::ptrdiff_t>(b));
    c.meeting.erase(c.meeting.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return c;
}

Clustering step3_reference_points(Clustering c, const Instance& in, const std::map<int, DroneTour>& tours) {
  c.reference.clear();
  for (std::size_t k = 0; k < c.clusters.size(); ++k) {
    const Point p = c.meeting[k];
    auto at = [&](double s) { return p + s * (in.origin - p); };
    auto ok = [&](double s) { return cluster_time(in, tours, c.clusters[k], at(s)) <= in.endurance + kSlack; };
    if (ok(1.0)) {
      c.reference.push_back(in.origin);
      continue;
    }
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 40; ++i) {
      const double m = 0.5 * (lo + hi);
      (ok(m) ? lo : hi) = m;
    }
    c.reference.push_back(at(lo));
  }
  return c;
}

TspPath step4_tsp(const std::vector<Point>& pts, Point orig, Point dest) {
  const int n = static_cast<int>(pts.size());
  TspPath out;
  auto P = [&](int i) { return pts[static_cast<std::size_t>(i)]; };
  if (n == 0) {
    out.length = dist(orig, dest);
    return out;
  }
  if (n <= 12) {
    const std::size_t full = std::size_t{1} << n;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> cost(full * static_cast<std::size_t>(n), inf);
    std::vector<int> from(full * static_cast<std::size_t>(n), -1);
    auto at = [&](std::size_t mask, int last) { return mask * static_cast<std::size_t>(n) + static_cast<std::size_t>(last); };
    for (int i = 0; i < n; ++i) cost[at(std::size_t{1} << i, i)] = dist(orig, P(i));
    for (std::size_t mask = 1; mask < full; ++mask) {
      for (int last = 0; last < n; ++last) {
        const double c = cost[at(mask, last)];
        if (!(mask >> last & 1) || std::isinf(c)) continue;
        for (int nx = 0; nx < n; ++nx) {
          if (mask >> nx & 1) continue;
          const std::size_t m2 = mask | std::size_t{1} << nx;
          const double v = c + dist(P(last), P(nx));
          if (v < cost[at(m2, nx)]) {
            cost[at(m2, nx)] = v;
            from[at(m2, nx)] = last;
          }
        }
      }
    }
    int last = 0;
    double best = inf;
    for (int i = 0; i < n; ++i) {
      const double v = cost[at(full - 1, i)] + dist(P(i), dest);
      if (v < best) {
        best = v;
        last = i;
      }
    }
    out.length = best;
    for (std::size_t mask = full - 1; last >= 0;) {
      out.order.push_back(last);
      const int prev = from[at(mask, last)];
      mask &= ~(std::size_t{1} << last);
      last = prev;
    }
    std::reverse(out.order.begin(), out.order.end());
    return out;
  }
  // Nearest neighbour from the origin, then 2-opt with fixed ends.
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Point cur = orig;
  for (int k = 0; k < n; ++k) {
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (!used[static_cast<std::size_t>(i)] && (pick < 0 || dist(cur, P(i)) < dist(cur, P(pick)))) pick = i;
    }
    used[static_cast<std::size_t>(pick)] = true;
    out.order.push_back(pick);
    cur = P(pick);
  }
  auto length = [&](const std::vector<int>& o) {
    double l = dist(orig, P(o.front())) + dist(P(o.back()), dest);
    for (std::size_t k = 1; k < o.size(); ++k) l += dist(P(o[k - 1]), P(o[k]));
    return l;
  };
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t i = 0; i + 1 < out.order.size(); ++i) {
      for (std::size_t j = i + 1; j < out.order.size(); ++j) {
        auto trial = out.order;
        std::reverse(trial.begin() + static_cast<std::ptrdiff_t>(i), trial.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        if (length(trial) < length(out.order) - 1e-12) {
          out.order = std::move(trial);
          improved = true;
        }
      }
    }
  }
  out.length = length(out.order);
  return out;
}

MatheuristicResult run_matheuristic(const Instance& in, const MatheuristicParams& params) {
  if (params.maxseed < 1) throw std::invalid_argument("run_matheuristic: maxseed must be at least 1");
  std::map<int, DroneTour> tours;
  for (const auto& g : in.graphs) tours[g.id] = step1_drone_tour(g, in.origin, in.visit_mode);

  MatheuristicResult r;
  r.tsp_length = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = params.first_seed; s < params.first_seed + static_cast<std::uint64_t>(params.maxseed); ++s) {
    auto c = step3_reference_points(step2_cluster(in, tours, s, params.maxit, params.strict_fleet), in, tours);
    const auto path = step4_tsp(c.reference, in.origin, in.destination);
    if (path.length < r.tsp_length) {
      r.tsp_length = path.length;
      r.seed = s;
      Clustering ordered;
      for (int k : path.order) {
        ordered.clusters.push_back(c.clusters[static_cast<std::size_t>(k)]);
        ordered.meeting.push_back(c.meeting[static_cast<std::size_t>(k)]);
        ordered.reference.push_back(c.reference[static_cast<std::size_t>(k)]);
      }
      r.clustering = std::move(ordered);
    }
  }

  auto& f = r.skeleton;
  f.n_stages = static_cast<int>(r.clustering.clusters.size());
  for (std::size_t t = 0; t < r.clustering.clusters.size(); ++t) {
    const auto& members = r.clustering.clusters[t];
    for (std::size_t d = 0; d < members.size(); ++d) {
      FixedOperation op;
      op.graph = members[d];
      op.drone = static_cast<int>(d) + 1;
      op.launch_stage = op.retrieve_stage = static_cast<int>(t) + 1;
      for (const auto& v : tours.at(members[d]).visits) op.route.push_back({v.edge, v.forward});
      f.operations.push_back(std::move(op));
    }
  }
  auto solved = solve_fixed(in, f, params.mode, params.tol);
  if (!check_solution(in, solved.solution, params.tol).pass()) {
    throw NonConvergedError(params.tol, solved.newton_iterations);
  }
  r.solution = std::move(solved.solution);
  return r;
}

std::string save_warmstart(const Instance& in, const FixedCombinatorics& f, const Solution& s,
                           const ModelOptions& options) {
  const auto m = build_model(in, options);
  const auto x = model_point(m, in, f, s);
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016" PRIx64, instance_fingerprint(in));
  std::string out = "# ammdrpg-warmstart v1\n";
  out += std::string("instance ") + fp + "\n";
  out += std::string("mode ") + std::string(to_string(options.mode)) + "\n";
  out += std::string("subtour ") + (options.subtour == Subtour::Mtz ? "mtz" : "sec") + "\n";
  out += std::string("vi ") + (options.valid_inequalities ? "on" : "off") + "\n";
  out += "objective " + text::fmt(s.objective) + "\n";
  long count = 0;
  for (const auto& v : m.variables) count += v.kind != VarKind::Continuous;
  out += "values " + std::to_string(count) + "\n";
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    if (m.variables[i].kind == VarKind::Continuous) continue;
    out += m.variables[i].name + " " + std::to_string(std::lround(x[i])) + "\n";
  }
  out += "end\n";
  return out;
}

std::map<std::string, long> load_warmstart(std::string_view body) {
  const std::string path = "<warmstart>";
  if (body.substr(0, 22) != "# ammdrpg-warmstart v1") throw FormatError(path, "missing '# ammdrpg-warmstart v1' header");
  text::Reader r(body);
  r.expect("instance", path, 1);
  r.expect("mode", path, 1);
  r.expect("subtour", path, 1);
  r.expect("vi", path, 1);
  r.expect("objective", path, 1);
  const long n = text::parse_int(r.expect("values", path, 1)[0], path);
  std::map<std::string, long> out;
  for (long k = 0; k < n; ++k) {
    const auto tok = r.next();
    if (tok.size() != 2) throw FormatError(path + ".values", "expected '<name> <value>'");
    if (!out.emplace(tok[0], text::parse_int(tok[1], path + ".values")).second) {
      throw FormatError(path + ".values", "duplicate variable " + tok[0]);
    }
  }
  r.expect("end", path, 0);
  return out;
}

}  // namespace ammdrpg
