#include "ammdrpg/grid_oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "ammdrpg/error.h"

namespace ammdrpg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CovLen {
  double cov;
  double len;
};

// Keeps the entries not dominated in (more coverage, less length).
void prune(std::vector<CovLen>& v) {
  std::sort(v.begin(), v.end(), [](const CovLen& a, const CovLen& b) {
    return a.cov != b.cov ? a.cov > b.cov : a.len < b.len;
  });
  std::vector<CovLen> out;
  for (const auto& c : v) {
    if (out.empty() || c.len < out.back().len) out.push_back(c);
  }
  v.swap(out);
}

// Shortest drone route table between lattice points of one graph.
class RouteTable {
 public:
  RouteTable(const TargetGraph& g, VisitMode mode, int lattice) : n_(lattice) {
    const int E = static_cast<int>(g.edges.size());
    for (const auto& e : g.edges) {
      for (int i = 0; i <= n_; ++i) pts_.push_back(lerp(e.segment, static_cast<double>(i) / n_));
    }
    const int P = static_cast<int>(pts_.size());
    ell_.assign(static_cast<std::size_t>(P) * P, kInf);

    std::vector<int> need(static_cast<std::size_t>(E), 0);
    std::vector<double> len(static_cast<std::size_t>(E));
    int required = 0;
    for (int e = 0; e < E; ++e) {
      len[static_cast<std::size_t>(e)] = g.edges[static_cast<std::size_t>(e)].length();
      if (mode == VisitMode::PerEdge && g.edges[static_cast<std::size_t>(e)].alpha > 0.0) {
        need[static_cast<std::size_t>(e)] =
            static_cast<int>(std::ceil(g.edges[static_cast<std::size_t>(e)].alpha * n_ - 1e-9));
        required |= 1 << e;
      }
    }
    const double req_cov = mode == VisitMode::WholeGraph ? g.alpha * g.total_length() * (1.0 - 1e-12) : 0.0;
    const bool track = mode == VisitMode::WholeGraph && req_cov > 0.0;
    const bool trivial = mode == VisitMode::PerEdge ? required == 0 : req_cov <= 0.0;
    if (trivial) {
      // A single touch of any edge suffices.
      for (int r = 0; r < P; ++r) at(r, r) = 0.0;
      return;
    }
    auto allowed = [&](int e) { return mode == VisitMode::WholeGraph || (required >> e & 1); };
    auto done = [&](int mask, const std::vector<CovLen>& list) {
      if (mode == VisitMode::PerEdge) return mask == required ? list.front().len : kInf;
      double best = kInf;
      for (const auto& c : list) {
        if (c.cov >= req_cov) best = std::min(best, c.len);
      }
      return best;
    };
    const int full = 1 << E;

    for (int r = 0; r < P; ++r) {
      const int e0 = r / (n_ + 1);
      const int i = r % (n_ + 1);
      if (!allowed(e0)) continue;
      // states[mask][exit point]
      std::vector<std::vector<std::vector<CovLen>>> states(
          static_cast<std::size_t>(full), std::vector<std::vector<CovLen>>(static_cast<std::size_t>(P)));
      for (int j = 0; j <= n_; ++j) {
        const int steps = std::abs(j - i);
        if (steps < need[static_cast<std::size_t>(e0)]) continue;
        const double l = steps * len[static_cast<std::size_t>(e0)] / n_;
        states[static_cast<std::size_t>(1 << e0)][static_cast<std::size_t>(e0 * (n_ + 1) + j)].push_back(
            {track ? std::min(l, req_cov) : 0.0, l});
      }
      for (int mask = 1; mask < full; ++mask) {
        auto& layer = states[static_cast<std::size_t>(mask)];
        for (int x = 0; x < P; ++x) {
          auto& list = layer[static_cast<std::size_t>(x)];
          if (list.empty()) continue;
          prune(list);
          at(r, x) = std::min(at(r, x), done(mask, list));
        }
        for (int e = 0; e < E; ++e) {
          if ((mask >> e & 1) || !allowed(e)) continue;
          const double le = len[static_cast<std::size_t>(e)];
          for (int k = 0; k <= n_; ++k) {
            const Point entry = pts_[static_cast<std::size_t>(e * (n_ + 1) + k)];
            std::vector<CovLen> arrive;
            for (int x = 0; x < P; ++x) {
              const auto& list = layer[static_cast<std::size_t>(x)];
              if (list.empty()) continue;
              const double hop = dist(pts_[static_cast<std::size_t>(x)], entry);
              for (const auto& c : list) arrive.push_back({c.cov, c.len + hop});
            }
            if (arrive.empty()) continue;
            prune(arrive);
            for (int m = 0; m <= n_; ++m) {
              const int steps = std::abs(m - k);
              if (steps < need[static_cast<std::size_t>(e)]) continue;
              const double l = steps * le / n_;
              auto& dst = states[static_cast<std::size_t>(mask | 1 << e)][static_cast<std::size_t>(e * (n_ + 1) + m)];
              for (const auto& c : arrive) dst.push_back({track ? std::min(c.cov + l, req_cov) : 0.0, c.len + l});
            }
          }
        }
        layer.clear();
        layer.shrink_to_fit();
      }
    }
  }

  // Shortest p -> route -> q length.
  double through(Point p, Point q) {
    const auto& a = from(p);
    double best = kInf;
    for (std::size_t l = 0; l < pts_.size(); ++l) {
      if (a[l] < kInf) best = std::min(best, a[l] + dist(pts_[l], q));
    }
    return best;
  }

 private:
  double& at(int r, int l) { return ell_[static_cast<std::size_t>(r) * pts_.size() + static_cast<std::size_t>(l)]; }

  // A(p, L) = min over entries R of |p - R| + ell(R, L), cached per p.
  const std::vector<double>& from(Point p) {
    auto it = cache_.find({p.x, p.y});
    if (it != cache_.end()) return it->second;
    const std::size_t P = pts_.size();
    std::vector<double> a(P, kInf);
    for (std::size_t r = 0; r < P; ++r) {
      const double d = dist(p, pts_[r]);
      const double* row = &ell_[r * P];
      for (std::size_t l = 0; l < P; ++l) {
        if (row[l] < kInf) a[l] = std::min(a[l], d + row[l]);
      }
    }
    if (cache_.size() > 200000) cache_.clear();
    return cache_.emplace(std::make_pair(p.x, p.y), std::move(a)).first->second;
  }

  int n_;
  std::vector<Point> pts_;
  std::vector<double> ell_;
  std::map<std::pair<double, double>, std::vector<double>> cache_;
};

using Structure = std::vector<std::vector<int>>;  // stages of graph indices

void structures(int n_graphs, int n_drones, std::vector<int>& left, Structure& cur, std::vector<Structure>& out) {
  if (left.empty()) {
    out.push_back(cur);
    return;
  }
  const int m = static_cast<int>(left.size());
  for (int mask = 1; mask < (1 << m); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) > n_drones) continue;
    std::vector<int> block;
    std::vector<int> rest;
    for (int k = 0; k < m; ++k) ((mask >> k & 1) ? block : rest).push_back(left[static_cast<std::size_t>(k)]);
    cur.push_back(block);
    structures(n_graphs, n_drones, rest, cur, out);
    cur.pop_back();
  }
}

struct Plan {
  double value = kInf;
  std::vector<Point> launch;
  std::vector<Point> retrieve;
};

class Search {
 public:
  Search(const Instance& in, std::vector<RouteTable>& tables) : in_(in), tables_(tables) {}

  double stage_cost(const std::vector<int>& block, Point p, Point q) {
    double op = dist(p, q);
    for (int g : block) {
      const double d = tables_[static_cast<std::size_t>(g)].through(p, q);
      op = std::max(op, in_.v_m * d / in_.v_d);
    }
    return op <= in_.v_m * in_.endurance * (1.0 + 1e-12) ? op : kInf;
  }

  // Exact DP over stages with per-stage candidate launch and retrieve sets.
  Plan run(const Structure& s, const std::vector<std::vector<Point>>& launch_sets,
           const std::vector<std::vector<Point>>& retrieve_sets) {
    const std::size_t S = s.size();
    std::vector<Point> prev_pts{in_.origin};
    std::vector<double> prev_val{0.0};
    std::vector<std::vector<int>> arg_p(S), arg_q(S);
    for (std::size_t t = 0; t < S; ++t) {
      const auto& L = launch_sets[t];
      const auto& R = retrieve_sets[t];
      std::vector<double> w(L.size(), kInf);
      std::vector<int> wfrom(L.size(), -1);
      for (std::size_t a = 0; a < L.size(); ++a) {
        for (std::size_t b = 0; b < prev_pts.size(); ++b) {
          const double v = prev_val[b] + dist(prev_pts[b], L[a]);
          if (v < w[a]) w[a] = v, wfrom[a] = static_cast<int>(b);
        }
      }
      std::vector<double> val(R.size(), kInf);
      std::vector<int> vfrom(R.size(), -1);
      for (std::size_t a = 0; a < L.size(); ++a) {
        if (!(w[a] < kInf)) continue;
        for (std::size_t b = 0; b < R.size(); ++b) {
          if (w[a] + dist(L[a], R[b]) >= val[b]) continue;  // cost is at least the straight leg
          const double v = w[a] + stage_cost(s[t], L[a], R[b]);
          if (v < val[b]) val[b] = v, vfrom[b] = static_cast<int>(a);
        }
      }
      arg_p[t] = wfrom;
      arg_q[t] = vfrom;
      prev_pts = R;
      prev_val = val;
    }
    Plan plan;
    int best = -1;
    for (std::size_t b = 0; b < prev_pts.size(); ++b) {
      const double v = prev_val[b] + dist(prev_pts[b], in_.destination);
      if (v < plan.value) plan.value = v, best = static_cast<int>(b);
    }
    if (best < 0) return plan;
    plan.launch.resize(S);
    plan.retrieve.resize(S);
    for (std::size_t t = S; t-- > 0;) {
      plan.retrieve[t] = retrieve_sets[t][static_cast<std::size_t>(best)];
      const int a = arg_q[t][static_cast<std::size_t>(best)];
      plan.launch[t] = launch_sets[t][static_cast<std::size_t>(a)];
      best = arg_p[t][static_cast<std::size_t>(a)];
    }
    return plan;
  }

 private:
  const Instance& in_;
  std::vector<RouteTable>& tables_;
};

}  // namespace

double grid_oracle(const Instance& in, double resolution, const OracleOptions& options) {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid_oracle: resolution must be positive");
  if (in.graphs.size() > 2 || in.n_drones > 2) throw LimitsExceededError("grid_oracle: at most 2 graphs and 2 drones");
  for (const auto& g : in.graphs) {
    const std::size_t cap = in.visit_mode == VisitMode::WholeGraph ? 2 : 3;
    if (g.edges.size() > cap) throw LimitsExceededError("grid_oracle: graph too large");
  }
  if (in.graphs.empty()) return dist(in.origin, in.destination);

  std::vector<RouteTable> tables;
  for (const auto& g : in.graphs) tables.emplace_back(g, in.visit_mode, options.lattice);

  Box box{in.origin, in.origin};
  auto grow = [&](Point p) {
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  };
  grow(in.destination);
  for (const auto& g : in.graphs) {
    for (const auto& n : g.nodes) grow(n);
  }
  const double span = std::max({box.width(), box.height(), 1e-9});
  double step = span / options.coarse_cells;

  // Grid points are anchored at box.lo and clipped to the box.
  auto snap = [&](double lo, double hi, double v, double h) {
    return std::clamp(lo + std::round((v - lo) / h) * h, lo, hi);
  };
  std::vector<Point> coarse;
  const int nx = static_cast<int>(std::ceil(box.width() / step - 1e-9));
  const int ny = static_cast<int>(std::ceil(box.height() / step - 1e-9));
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      coarse.push_back({std::min(box.lo.x + i * step, box.hi.x), std::min(box.lo.y + j * step, box.hi.y)});
    }
  }

  std::vector<Structure> all;
  std::vector<int> left;
  for (std::size_t g = 0; g < in.graphs.size(); ++g) left.push_back(static_cast<int>(g));
  Structure cur;
  structures(static_cast<int>(in.graphs.size()), in.n_drones, left, cur, all);

  Search search(in, tables);
  double best = kInf;
  for (const auto& s : all) {
    std::vector<std::vector<Point>> sets(s.size(), coarse);
    Plan plan = search.run(s, sets, sets);
    if (!(plan.value < kInf)) continue;
    double h = step;
    for (;;) {
      // Re-centre windows until the plan stops improving at this step.
      for (int round = 0; round < 50; ++round) {
        std::vector<std::vector<Point>> ls(s.size()), rs(s.size());
        for (std::size_t t = 0; t < s.size(); ++t) {
          for (int di = -options.window; di <= options.window; ++di) {
            for (int dj = -options.window; dj <= options.window; ++dj) {
              const Point a = plan.launch[t];
              const Point b = plan.retrieve[t];
              ls[t].push_back({snap(box.lo.x, box.hi.x, a.x + di * h, h), snap(box.lo.y, box.hi.y, a.y + dj * h, h)});
              rs[t].push_back({snap(box.lo.x, box.hi.x, b.x + di * h, h), snap(box.lo.y, box.hi.y, b.y + dj * h, h)});
            }
          }
          ls[t].push_back(plan.launch[t]);
          rs[t].push_back(plan.retrieve[t]);
        }
        Plan next = search.run(s, ls, rs);
        if (!(next.value < plan.value - 1e-12)) break;
        plan = next;
      }
      if (h <= resolution) break;
      h = std::max(h / 2.0, resolution);
    }
    best = std::min(best, plan.value);
  }
  return best;
}

}  // namespace ammdrpg
