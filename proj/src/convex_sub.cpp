#include "ammdrpg/convex_sub.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>

#include "ammdrpg/error.h"
#include "ammdrpg/random.h"
#include "barrier.h"

namespace ammdrpg {

BinaryView binary_view(const FixedCombinatorics& f) {
  BinaryView b;
  for (const auto& op : f.operations) {
    if (op.route.empty()) continue;
    b.u[{op.graph, op.route.front().edge, op.launch_stage, op.drone}] = 1;
    b.v[{op.graph, op.route.back().edge, op.retrieve_stage, op.drone}] = 1;
    for (std::size_t k = 0; k < op.route.size(); ++k) {
      const auto& st = op.route[k];
      b.mu[{op.graph, st.edge}] = 1;
      b.entry[{op.graph, st.edge}] = st.forward ? 1 : 0;
      b.order[{op.graph, st.edge}] = static_cast<int>(k);
      if (k + 1 < op.route.size()) b.z[{op.graph, st.edge, op.route[k + 1].edge}] = 1;
    }
  }
  return b;
}

void check_combinatorics(const Instance& in, const FixedCombinatorics& f, SyncMode mode) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid skeleton: " + what); };
  if (f.n_stages < 0 || f.n_stages > static_cast<int>(in.graphs.size())) fail("stage count");
  std::set<int> seen;
  std::set<std::pair<int, int>> launches;
  std::set<std::pair<int, int>> retrieves;
  for (const auto& op : f.operations) {
    const std::string who = "graph " + std::to_string(op.graph);
    const auto& g = in.graph_by_id(op.graph);
    if (!seen.insert(op.graph).second) fail(who + " served twice");
    if (op.drone < 1 || op.drone > in.n_drones) fail(who + " drone index");
    if (op.launch_stage < 1 || op.retrieve_stage > f.n_stages || op.launch_stage > op.retrieve_stage) {
      fail(who + " stage range");
    }
    if (mode == SyncMode::Sync && op.launch_stage != op.retrieve_stage) fail(who + " not synchronous");
    if (!launches.insert({op.launch_stage, op.drone}).second) fail(who + " launch clash");
    if (!retrieves.insert({op.retrieve_stage, op.drone}).second) fail(who + " retrieve clash");
    if (op.route.empty()) fail(who + " empty route");
    std::set<int> edges;
    double length = 0.0;
    for (const auto& st : op.route) {
      if (st.edge < 0 || st.edge >= static_cast<int>(g.edges.size())) fail(who + " edge index");
      if (!edges.insert(st.edge).second) fail(who + " repeated edge");
      length += g.edges[static_cast<std::size_t>(st.edge)].length();
    }
    if (in.visit_mode == VisitMode::PerEdge) {
      for (const auto& e : g.edges) {
        if (e.alpha > 0.0 && !edges.count(e.id)) fail(who + " misses a required edge");
      }
    } else if (length < g.alpha * g.total_length() * (1.0 - 1e-12)) {
      fail(who + " route too short for coverage");
    }
  }
  if (seen.size() != in.graphs.size()) fail("not every graph is served");
  for (const auto& a : f.operations) {
    for (const auto& b : f.operations) {
      if (&a == &b || a.drone != b.drone) continue;
      if (a.launch_stage <= b.retrieve_stage && b.launch_stage <= a.retrieve_stage) {
        fail("drone " + std::to_string(a.drone) + " busy twice");
      }
    }
  }
}

namespace {

using barrier::Affine;

struct AffPoint {
  Affine x;
  Affine y;
};

AffPoint constant_point(Point p) {
  AffPoint a;
  a.x.constant = p.x;
  a.y.constant = p.y;
  return a;
}

AffPoint var_point(int j) {
  AffPoint a;
  a.x.add(j, 1.0);
  a.y.add(j + 1, 1.0);
  return a;
}

Affine minus(const Affine& a, const Affine& b) {
  Affine r = a;
  r.constant -= b.constant;
  for (const auto& [j, v] : b.terms) r.terms.emplace_back(j, -v);
  // merge duplicates
  std::sort(r.terms.begin(), r.terms.end());
  std::vector<std::pair<int, double>> merged;
  for (const auto& t : r.terms) {
    if (!merged.empty() && merged.back().first == t.first) {
      merged.back().second += t.second;
    } else {
      merged.push_back(t);
    }
  }
  r.terms.clear();
  for (const auto& t : merged) {
    if (t.second != 0.0) r.terms.push_back(t);
  }
  return r;
}

// Edge parameter: either a variable or a constant.
struct Param {
  int var = -1;
  double value = 0.0;

  void add_to(Affine& a, double coef) const {
    if (var >= 0) {
      a.add(var, coef);
    } else {
      a.constant += coef * value;
    }
  }
  double eval(const std::vector<double>& y) const { return var >= 0 ? y[static_cast<std::size_t>(var)] : value; }
};

AffPoint point_at(const Segment& s, const Param& p) {
  AffPoint a = constant_point(s.b);
  p.add_to(a.x, s.c.x - s.b.x);
  p.add_to(a.y, s.c.y - s.b.y);
  return a;
}

struct VisitVars {
  int graph_edge;
  bool forward;
  double length;
  Param rho;
  Param lambda;
  const Segment* segment;
};

struct OpVars {
  const FixedOperation* op;
  int k_launch;    // compressed stage index
  int k_retrieve;
  std::vector<VisitVars> visits;
  std::vector<int> legs;  // epigraph variables, visits.size() + 1
};

struct Layout {
  int n_active = 0;
  std::vector<int> compressed;  // original stage (0-based) -> active index or -1
  int n = 0;
  std::vector<int> transit;     // n_active + 1
  std::vector<int> operation;   // n_active
  std::vector<OpVars> ops;

  int launch_var(int k) const { return 4 * k; }
  int retrieve_var(int k) const { return 4 * k + 2; }
};

Layout make_layout(const Instance& in, const FixedCombinatorics& f) {
  Layout L;
  std::vector<bool> active(static_cast<std::size_t>(f.n_stages), false);
  for (const auto& op : f.operations) {
    active[static_cast<std::size_t>(op.launch_stage - 1)] = true;
    active[static_cast<std::size_t>(op.retrieve_stage - 1)] = true;
  }
  for (int t = 0; t < f.n_stages; ++t) {
    L.compressed.push_back(active[static_cast<std::size_t>(t)] ? L.n_active++ : -1);
  }
  L.n = 4 * L.n_active;
  for (const auto& op : f.operations) {
    const auto& g = in.graph_by_id(op.graph);
    OpVars ov;
    ov.op = &op;
    ov.k_launch = L.compressed[static_cast<std::size_t>(op.launch_stage - 1)];
    ov.k_retrieve = L.compressed[static_cast<std::size_t>(op.retrieve_stage - 1)];
    double route_length = 0.0;
    for (const auto& st : op.route) route_length += g.edges[static_cast<std::size_t>(st.edge)].length();
    // Full traversal is forced when the requirement leaves no freedom.
    const bool all_full = in.visit_mode == VisitMode::WholeGraph && g.alpha >= 1.0 &&
                          route_length <= g.total_length() * (1.0 + 1e-12);
    for (const auto& st : op.route) {
      const auto& e = g.edges[static_cast<std::size_t>(st.edge)];
      VisitVars vv{st.edge, st.forward, e.length(), {}, {}, &e.segment};
      const bool full = all_full || (in.visit_mode == VisitMode::PerEdge && e.alpha >= 1.0);
      if (full) {
        vv.rho.value = st.forward ? 0.0 : 1.0;
        vv.lambda.value = st.forward ? 1.0 : 0.0;
      } else {
        vv.rho.var = L.n++;
        vv.lambda.var = L.n++;
      }
      ov.visits.push_back(vv);
    }
    L.ops.push_back(std::move(ov));
  }
  for (int k = 0; k <= L.n_active; ++k) L.transit.push_back(L.n++);
  for (int k = 0; k < L.n_active; ++k) L.operation.push_back(L.n++);
  for (auto& ov : L.ops) {
    for (std::size_t j = 0; j <= ov.visits.size(); ++j) ov.legs.push_back(L.n++);
  }
  return L;
}

AffPoint launch_point(const Layout& L, const Instance& in, int k) {
  if (k >= L.n_active) return constant_point(in.destination);
  return var_point(L.launch_var(k));
}

AffPoint retrieve_point(const Layout& L, const Instance& in, int k) {
  if (k < 0) return constant_point(in.origin);
  return var_point(L.retrieve_var(k));
}

barrier::Cone cone(int t, const AffPoint& a, const AffPoint& b) {
  barrier::Cone c;
  c.t.add(t, 1.0);
  c.wx = minus(a.x, b.x);
  c.wy = minus(a.y, b.y);
  return c;
}

// Signed intra-edge length, linear in the parameters.
void add_intra(Affine& row, const VisitVars& v, double coef) {
  const double s = v.forward ? 1.0 : -1.0;
  v.lambda.add_to(row, coef * s * v.length);
  v.rho.add_to(row, -coef * s * v.length);
}

struct Built {
  barrier::Program program;
  Layout layout;
};

Built build_program(const Instance& in, const FixedCombinatorics& f, double delta,
                    const SolverOptions& options) {
  Built B{{}, make_layout(in, f)};
  auto& P = B.program;
  const auto& L = B.layout;
  P.n = L.n;
  P.c.assign(static_cast<std::size_t>(L.n), 0.0);
  for (int j : L.transit) P.c[static_cast<std::size_t>(j)] = 1.0;
  for (int j : L.operation) P.c[static_cast<std::size_t>(j)] = 1.0;

  // Mothership legs.
  for (int k = 0; k <= L.n_active; ++k) {
    P.cones.push_back(cone(L.transit[static_cast<std::size_t>(k)], launch_point(L, in, k), retrieve_point(L, in, k - 1)));
  }
  for (int k = 0; k < L.n_active; ++k) {
    P.cones.push_back(cone(L.operation[static_cast<std::size_t>(k)], var_point(L.launch_var(k)), var_point(L.retrieve_var(k))));
  }

  const double cap = options.raw_endurance_cap ? in.endurance : in.v_m * in.endurance;
  for (int k = 0; k < L.n_active; ++k) {
    Affine row;
    row.add(L.operation[static_cast<std::size_t>(k)], 1.0);
    row.constant = -cap;
    P.rows.push_back(row);
  }

  for (const auto& ov : L.ops) {
    const auto& g = in.graph_by_id(ov.op->graph);
    // Drone legs.
    AffPoint at = var_point(L.launch_var(ov.k_launch));
    for (std::size_t j = 0; j < ov.visits.size(); ++j) {
      const auto& v = ov.visits[j];
      P.cones.push_back(cone(ov.legs[j], point_at(*v.segment, v.rho), at));
      at = point_at(*v.segment, v.lambda);
    }
    P.cones.push_back(cone(ov.legs.back(), var_point(L.retrieve_var(ov.k_retrieve)), at));

    // Parameter ranges, direction and per-edge coverage.
    for (const auto& v : ov.visits) {
      for (const Param* p : {&v.rho, &v.lambda}) {
        if (p->var < 0) continue;
        Affine lo;
        lo.add(p->var, -1.0);
        P.rows.push_back(lo);
        Affine hi;
        hi.add(p->var, 1.0);
        hi.constant = -1.0;
        P.rows.push_back(hi);
      }
      if (v.rho.var < 0) continue;
      double alpha = 0.0;
      if (in.visit_mode == VisitMode::PerEdge) alpha = g.edges[static_cast<std::size_t>(v.graph_edge)].alpha;
      // alpha - s (lambda - rho) <= 0
      Affine row;
      const double s = v.forward ? 1.0 : -1.0;
      row.add(v.lambda.var, -s);
      row.add(v.rho.var, s);
      row.constant = alpha;
      P.rows.push_back(row);
    }
    if (in.visit_mode == VisitMode::WholeGraph && g.alpha > 0.0) {
      Affine row;
      row.constant = g.alpha * g.total_length();
      for (const auto& v : ov.visits) add_intra(row, v, -1.0);
      if (!row.terms.empty()) P.rows.push_back(row);
    }

    // Drone time within the mothership window.
    Affine dcw;
    for (int leg : ov.legs) dcw.add(leg, 1.0 / in.v_d);
    for (const auto& v : ov.visits) add_intra(dcw, v, 1.0 / in.v_d);
    for (int k = ov.k_launch; k <= ov.k_retrieve; ++k) {
      dcw.add(L.operation[static_cast<std::size_t>(k)], -1.0 / in.v_m);
      if (k < ov.k_retrieve) dcw.add(L.transit[static_cast<std::size_t>(k + 1)], -1.0 / in.v_m);
    }
    P.rows.push_back(dcw);
  }

  barrier::normalise_rows(P);
  for (auto& r : P.rows) r.constant -= delta;
  return B;
}

std::vector<double> initial_point(const Instance& in, const Built& B,
                                  std::uint64_t random_start) {
  const auto& L = B.layout;
  std::vector<double> y(static_cast<std::size_t>(L.n), 0.0);
  Rng rng(random_start);
  Box box{in.origin, in.origin};
  auto grow = [&](Point p) {
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  };
  grow(in.destination);
  for (const auto& g : in.graphs) {
    for (const auto& n : g.nodes) grow(n);
  }
  for (int k = 0; k < L.n_active; ++k) {
    Point l = lerp({in.origin, in.destination}, (2.0 * k + 1.0) / (2.0 * L.n_active + 1.0));
    Point r = lerp({in.origin, in.destination}, (2.0 * k + 2.0) / (2.0 * L.n_active + 1.0));
    if (random_start != 0) {
      l = {rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y)};
      r = {rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y)};
    }
    y[static_cast<std::size_t>(L.launch_var(k))] = l.x;
    y[static_cast<std::size_t>(L.launch_var(k) + 1)] = l.y;
    y[static_cast<std::size_t>(L.retrieve_var(k))] = r.x;
    y[static_cast<std::size_t>(L.retrieve_var(k) + 1)] = r.y;
  }
  for (const auto& ov : L.ops) {
    const auto& g = in.graph_by_id(ov.op->graph);
    for (const auto& v : ov.visits) {
      if (v.rho.var < 0) continue;
      double a = in.visit_mode == VisitMode::PerEdge ? g.edges[static_cast<std::size_t>(v.graph_edge)].alpha
                                                     : g.alpha;
      double rho = 0.0;
      double lambda = a;
      if (random_start != 0) {
        rho = rng.uniform();
        lambda = rng.uniform();
      } else if (!v.forward) {
        rho = 1.0;
        lambda = 1.0 - a;
      }
      y[static_cast<std::size_t>(v.rho.var)] = rho;
      y[static_cast<std::size_t>(v.lambda.var)] = lambda;
    }
  }
  // Epigraph variables strictly above their norms.
  for (const auto& c : B.program.cones) {
    const double w = std::hypot(c.wx.eval(y), c.wy.eval(y));
    const int t = c.t.terms.front().first;
    y[static_cast<std::size_t>(t)] = w + (random_start != 0 ? rng.uniform(0.5, 5.0) : 1.0);
  }
  return y;
}

// Phase I: minimise the largest row value; returns a strictly feasible point
// or nullopt when none exists.
std::optional<std::vector<double>> phase_one(const barrier::Program& P, std::vector<double> y, double delta,
                                             int max_newton, int& newton) {
  if (P.rows.empty() || P.max_row(y) < -1e-3) return y;
  barrier::Program Q;
  Q.n = P.n + 1;
  const int sigma = P.n;
  Q.c.assign(static_cast<std::size_t>(Q.n), 0.0);
  Q.c[static_cast<std::size_t>(sigma)] = 1.0;
  Q.cones = P.cones;
  for (auto r : P.rows) {
    r.add(sigma, -1.0);
    Q.rows.push_back(r);
  }
  double scale = 1.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const double bound = 100.0 * scale;
  for (int j = 0; j < P.n; ++j) {
    Affine hi;
    hi.add(j, 1.0);
    hi.constant = -bound;
    Q.rows.push_back(hi);
    Affine lo;
    lo.add(j, -1.0);
    lo.constant = -bound;
    Q.rows.push_back(lo);
  }
  Affine floor;
  floor.add(sigma, -1.0);
  floor.constant = -1.0;
  Q.rows.push_back(floor);
  y.push_back(std::max(P.max_row(y), -0.5) + 1.0);

  barrier::Options opt;
  opt.gap_target = 0.25 * delta;
  opt.max_newton = max_newton;
  opt.stop = [sigma](const std::vector<double>& z, double) { return z[static_cast<std::size_t>(sigma)] < -1e-3; };
  auto res = barrier::minimise(Q, y, opt);
  newton += res.newton;
  const double s = res.y[static_cast<std::size_t>(sigma)];
  res.y.pop_back();
  if (s < 0.0 && P.max_row(res.y) < 0.0 && P.min_cone_margin(res.y) > 0.0) return res.y;
  if (!res.converged && !res.stopped) throw NonConvergedError(delta, res.newton);
  return std::nullopt;
}

int attribute_infeasibility(const Instance& in, const FixedCombinatorics& f, SyncMode mode,
                            const SolverOptions& options) {
  if (f.operations.size() == 1) return f.operations.front().graph;
  if (mode == SyncMode::Async) return -1;  // windows may include transit legs
  const double stage_time = options.raw_endurance_cap ? in.endurance / in.v_m : in.endurance;
  for (const auto& op : f.operations) {
    const auto& g = in.graph_by_id(op.graph);
    double need = 0.0;
    if (in.visit_mode == VisitMode::PerEdge) {
      for (const auto& e : g.edges) need += e.alpha * e.length();
    } else {
      need = g.alpha * g.total_length();
    }
    if (need / in.v_d > stage_time) return op.graph;
  }
  return -1;
}

}  // namespace

ContinuousSolution solve_fixed(const Instance& in, const FixedCombinatorics& f, SyncMode mode, double tol,
                               const SolverOptions& options) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_fixed: tol must be positive");
  check_combinatorics(in, f, mode);
  const double delta = 0.01 * tol;
  const Built B = build_program(in, f, delta, options);
  const auto& P = B.program;
  const auto& L = B.layout;

  ContinuousSolution out;
  auto y0 = initial_point(in, B, options.random_start);
  auto start = phase_one(P, y0, delta, options.max_newton, out.newton_iterations);
  if (!start) {
    const int g = attribute_infeasibility(in, f, mode, options);
    throw InfeasibleError("no continuous point satisfies coverage, coordination and capacity for this skeleton"
                          + (g >= 0 ? " (graph " + std::to_string(g) + ")" : std::string()),
                          g);
  }

  barrier::Options opt;
  opt.max_newton = std::max(1, options.max_newton - out.newton_iterations);
  opt.keep_trace = options.keep_trace;
  opt.gap_target = 0.0;
  opt.tau0 = std::max(1.0, P.nu()) / (1.0 + std::abs(P.objective(*start)));
  opt.stop = [&](const std::vector<double>& y, double gap) {
    return gap <= 0.1 * tol * (1.0 + std::abs(P.objective(y)));
  };
  auto res = barrier::minimise(P, *start, opt);
  out.newton_iterations += res.newton;
  if (!res.stopped) throw NonConvergedError(tol, out.newton_iterations);
  out.gap_bound = res.gap_bound;
  for (const auto& s : res.trace) out.trace.push_back({s.outer, s.merit, s.objective});
  const auto& y = res.y;

  // Assemble the solution from the barrier iterate.
  Solution& sol = out.solution;
  sol.mode = mode;
  sol.origin = in.origin;
  sol.destination = in.destination;
  sol.instance_fingerprint = instance_fingerprint(in);
  auto at = [&](int j) { return Point{y[static_cast<std::size_t>(j)], y[static_cast<std::size_t>(j + 1)]}; };
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };

  for (const auto& ov : L.ops) {
    Operation op;
    op.graph = ov.op->graph;
    op.drone = ov.op->drone;
    op.launch_stage = ov.op->launch_stage;
    op.retrieve_stage = ov.op->retrieve_stage;
    for (const auto& v : ov.visits) {
      op.visits.push_back({v.graph_edge, clamp01(v.rho.eval(y)), clamp01(v.lambda.eval(y)), v.forward});
    }
    sol.operations.push_back(std::move(op));
  }

  Point prev = in.origin;
  for (int t = 0; t < f.n_stages; ++t) {
    const int k = L.compressed[static_cast<std::size_t>(t)];
    Stage st;
    if (k < 0) {
      st.launch = st.retrieve = prev;
    } else {
      st.launch = at(L.launch_var(k));
      st.retrieve = at(L.retrieve_var(k));
    }
    st.transit = dist(prev, st.launch);
    st.operation = dist(st.launch, st.retrieve);
    if (mode == SyncMode::Async && k >= 0) {
      st.transit = std::max(st.transit, y[static_cast<std::size_t>(L.transit[static_cast<std::size_t>(k)])]);
      st.operation = std::max(st.operation, y[static_cast<std::size_t>(L.operation[static_cast<std::size_t>(k)])]);
    }
    sol.stages.push_back(st);
    prev = st.retrieve;
  }
  sol.final_transit = dist(prev, in.destination);
  if (mode == SyncMode::Async) {
    sol.final_transit = std::max(sol.final_transit, y[static_cast<std::size_t>(L.transit.back())]);
  } else {
    // The stage leg must last as long as the slowest drone of the stage.
    for (const auto& op : sol.operations) {
      const auto& g = in.graph_by_id(op.graph);
      auto& st = sol.stages[static_cast<std::size_t>(op.launch_stage - 1)];
      double len = 0.0;
      Point p = st.launch;
      for (const auto& v : op.visits) {
        const auto& seg = g.edges[static_cast<std::size_t>(v.edge)].segment;
        len += dist(p, lerp(seg, v.rho)) + std::abs(v.lambda - v.rho) * edge_length(seg);
        p = lerp(seg, v.lambda);
      }
      len += dist(p, st.retrieve);
      st.operation = std::max(st.operation, in.v_m * len / in.v_d);
    }
  }
  sol.objective = sol.recomputed_objective();

  CheckOptions co;
  co.raw_endurance_cap = options.raw_endurance_cap;
  out.residuals = check_solution(in, sol, tol, co);
  if (!out.residuals.pass()) throw NonConvergedError(tol, out.newton_iterations);
  return out;
}

ValidationReport feasibility_report(const Instance& in, const FixedCombinatorics& f,
                                    const ContinuousSolution& sol, double tol) {
  auto report = check_solution(in, sol.solution, tol);
  for (const auto& op : sol.solution.operations) {
    auto it = std::find_if(f.operations.begin(), f.operations.end(),
                           [&](const FixedOperation& o) { return o.graph == op.graph; });
    bool same = it != f.operations.end() && it->drone == op.drone && it->launch_stage == op.launch_stage &&
                it->retrieve_stage == op.retrieve_stage && it->route.size() == op.visits.size();
    for (std::size_t k = 0; same && k < op.visits.size(); ++k) {
      same = it->route[k].edge == op.visits[k].edge && it->route[k].forward == op.visits[k].forward;
    }
    if (!same) {
      report.max_residual[static_cast<int>(Family::Assignment)] =
          std::max(report.max_residual[static_cast<int>(Family::Assignment)], 1.0);
      report.violations.push_back({Family::Assignment, "operation[graph=" + std::to_string(op.graph) + "].skeleton", 1.0});
    }
  }
  return report;
}

}  // namespace ammdrpg
