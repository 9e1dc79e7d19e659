#include "ammdrpg/model_ir.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "ammdrpg/error.h"
#include "ammdrpg/text.h"

namespace ammdrpg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string nm(const char* fmt, ...) {
  char buf[160];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

// Sums repeated variables and drops zero coefficients, keeping first-seen order.
Terms merge(const Terms& in) {
  Terms out;
  for (const auto& [v, c] : in) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& t) { return t.first == v; });
    if (it == out.end()) {
      out.push_back({v, c});
    } else {
      it->second += c;
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const auto& t) { return t.second == 0.0; }), out.end());
  return out;
}

using Key4 = std::tuple<int, int, int, int>;  // graph index, edge, stage, drone
using Key3 = std::tuple<int, int, int>;       // graph index, edge, other edge
using Key2 = std::pair<int, int>;             // graph index, edge

struct Builder {
  const Instance& in;
  Model m;
  BigMTable bm;
  int G = 0, T = 0, D = 0;

  std::map<Key2, VarId> mu, entry, s, rho, lambda, numin, numax, Rx, Ry, Lx, Ly, de, pmu, q;
  std::map<Key4, VarId> u, v, dL, dR, pL, pR;
  std::map<Key3, VarId> z, dp, pp;
  std::map<int, VarId> xLx, xLy, xRx, xRy, dRL, dLR, beta, k;

  Builder(const Instance& instance, const ModelOptions& opt) : in(instance) {
    m.options = opt;
    m.visit_mode = in.visit_mode;
    G = static_cast<int>(in.graphs.size());
    T = G;
    D = in.n_drones;
    m.n_stages = T;
    bm = big_m_bounds(in);
  }

  const TargetGraph& graph(int gi) const { return in.graphs[static_cast<std::size_t>(gi)]; }
  int gid(int gi) const { return graph(gi).id; }
  int edges(int gi) const { return static_cast<int>(graph(gi).edges.size()); }

  VarId var(const std::string& family, std::string name, VarKind kind, double lo, double hi) {
    const VarId id = static_cast<VarId>(m.variables.size());
    m.index.emplace(name, id);
    m.variables.push_back({std::move(name), family, kind, lo, hi});
    return id;
  }

  void row(const std::string& tag, std::string name, const Terms& terms, Sense sense, double rhs) {
    m.linear.push_back({std::move(name), tag, merge(terms), sense, rhs});
  }

  void cone(const std::string& tag, std::string name, std::pair<VarId, VarId> a, std::pair<VarId, VarId> b,
            VarId bound) {
    m.soc.push_back({std::move(name), tag, a, b, Point{}, bound});
  }

  template <class F>
  void each_edge(F f) {
    for (int gi = 0; gi < G; ++gi) {
      for (int e = 0; e < edges(gi); ++e) f(gi, e);
    }
  }
  template <class F>
  void each_pair(F f) {
    for (int gi = 0; gi < G; ++gi) {
      for (int e = 0; e < edges(gi); ++e) {
        for (int e2 = 0; e2 < edges(gi); ++e2) {
          if (e != e2) f(gi, e, e2);
        }
      }
    }
  }
  template <class F>
  void each_etd(F f) {
    each_edge([&](int gi, int e) {
      for (int t = 1; t <= T; ++t) {
        for (int d = 1; d <= D; ++d) f(gi, e, t, d);
      }
    });
  }

  // Launch (or retrieve) indicator of graph gi at (t, d) as terms.
  Terms sum_over_edges(const std::map<Key4, VarId>& x, int gi, int t, int d, double c = 1.0) const {
    Terms out;
    for (int e = 0; e < edges(gi); ++e) out.push_back({x.at({gi, e, t, d}), c});
    return out;
  }

  void variables() {
    const bool mtz = m.options.subtour == Subtour::Mtz;
    each_edge([&](int gi, int e) { mu[{gi, e}] = var("mu", nm("mu_g%d_e%d", gid(gi), e), VarKind::Binary, 0, 1); });
    each_edge([&](int gi, int e) {
      entry[{gi, e}] = var("entry", nm("entry_g%d_e%d", gid(gi), e), VarKind::Binary, 0, 1);
    });
    each_etd([&](int gi, int e, int t, int d) {
      u[{gi, e, t, d}] = var("u", nm("u_g%d_e%d_t%d_d%d", gid(gi), e, t, d), VarKind::Binary, 0, 1);
    });
    each_etd([&](int gi, int e, int t, int d) {
      v[{gi, e, t, d}] = var("v", nm("v_g%d_e%d_t%d_d%d", gid(gi), e, t, d), VarKind::Binary, 0, 1);
    });
    each_pair([&](int gi, int e, int f) {
      z[{gi, e, f}] = var("z", nm("z_g%d_e%d_e%d", gid(gi), e, f), VarKind::Binary, 0, 1);
    });
    if (mtz) {
      each_edge([&](int gi, int e) {
        s[{gi, e}] = var("s", nm("s_g%d_e%d", gid(gi), e), VarKind::Continuous, 0, edges(gi) - 1);
      });
    }
    each_edge([&](int gi, int e) { rho[{gi, e}] = var("rho", nm("rho_g%d_e%d", gid(gi), e), VarKind::Continuous, 0, 1); });
    each_edge([&](int gi, int e) {
      lambda[{gi, e}] = var("lambda", nm("lambda_g%d_e%d", gid(gi), e), VarKind::Continuous, 0, 1);
    });
    each_edge([&](int gi, int e) {
      numin[{gi, e}] = var("numin", nm("numin_g%d_e%d", gid(gi), e), VarKind::Continuous, 0, 1);
    });
    each_edge([&](int gi, int e) {
      numax[{gi, e}] = var("numax", nm("numax_g%d_e%d", gid(gi), e), VarKind::Continuous, 0, 1);
    });
    each_edge([&](int gi, int e) {
      Rx[{gi, e}] = var("R", nm("R_g%d_e%d_x", gid(gi), e), VarKind::Continuous, -kInf, kInf);
      Ry[{gi, e}] = var("R", nm("R_g%d_e%d_y", gid(gi), e), VarKind::Continuous, -kInf, kInf);
    });
    each_edge([&](int gi, int e) {
      Lx[{gi, e}] = var("L", nm("L_g%d_e%d_x", gid(gi), e), VarKind::Continuous, -kInf, kInf);
      Ly[{gi, e}] = var("L", nm("L_g%d_e%d_y", gid(gi), e), VarKind::Continuous, -kInf, kInf);
    });
    for (int t = 0; t <= T + 1; ++t) {
      xLx[t] = var("xL", nm("xL_t%d_x", t), VarKind::Continuous, -kInf, kInf);
      xLy[t] = var("xL", nm("xL_t%d_y", t), VarKind::Continuous, -kInf, kInf);
    }
    for (int t = 0; t <= T + 1; ++t) {
      xRx[t] = var("xR", nm("xR_t%d_x", t), VarKind::Continuous, -kInf, kInf);
      xRy[t] = var("xR", nm("xR_t%d_y", t), VarKind::Continuous, -kInf, kInf);
    }
    each_etd([&](int gi, int e, int t, int d) {
      dL[{gi, e, t, d}] = var("dL", nm("dL_g%d_e%d_t%d_d%d", gid(gi), e, t, d), VarKind::Continuous, 0, bm.m_launch);
    });
    each_edge([&](int gi, int e) {
      de[{gi, e}] = var("de", nm("de_g%d_e%d", gid(gi), e), VarKind::Continuous, 0,
                        graph(gi).edges[static_cast<std::size_t>(e)].length());
    });
    each_pair([&](int gi, int e, int f) {
      dp[{gi, e, f}] = var("dp", nm("dp_g%d_e%d_e%d", gid(gi), e, f), VarKind::Continuous,
                           bm.m_pair_lo.at({gid(gi), e, f}), bm.m_pair.at({gid(gi), e, f}));
    });
    each_etd([&](int gi, int e, int t, int d) {
      dR[{gi, e, t, d}] = var("dR", nm("dR_g%d_e%d_t%d_d%d", gid(gi), e, t, d), VarKind::Continuous, 0, bm.m_retrieve);
    });
    for (int t = 0; t <= T; ++t) dRL[t] = var("dRL", nm("dRL_t%d", t), VarKind::Continuous, 0, bm.diameter);
    for (int t = 1; t <= T; ++t) dLR[t] = var("dLR", nm("dLR_t%d", t), VarKind::Continuous, 0, bm.diameter);
    each_etd([&](int gi, int e, int t, int d) {
      pL[{gi, e, t, d}] = var("pL", nm("pL_g%d_e%d_t%d_d%d", gid(gi), e, t, d), VarKind::Continuous, 0, bm.m_launch);
    });
    each_etd([&](int gi, int e, int t, int d) {
      pR[{gi, e, t, d}] = var("pR", nm("pR_g%d_e%d_t%d_d%d", gid(gi), e, t, d), VarKind::Continuous, 0, bm.m_retrieve);
    });
    each_pair([&](int gi, int e, int f) {
      pp[{gi, e, f}] = var("pp", nm("pp_g%d_e%d_e%d", gid(gi), e, f), VarKind::Continuous, 0,
                           bm.m_pair.at({gid(gi), e, f}));
    });
    each_edge([&](int gi, int e) {
      pmu[{gi, e}] = var("pmu", nm("pmu_g%d_e%d", gid(gi), e), VarKind::Continuous, 0,
                         graph(gi).edges[static_cast<std::size_t>(e)].length());
    });
    each_edge([&](int gi, int e) { q[{gi, e}] = var("q", nm("q_g%d_e%d", gid(gi), e), VarKind::Continuous, 0, 1); });
    if (m.options.valid_inequalities) {
      for (int t = 1; t <= T; ++t) beta[t] = var("beta", nm("beta_t%d", t), VarKind::Binary, 0, 1);
      for (int t = 1; t <= T; ++t) k[t] = var("k", nm("k_t%d", t), VarKind::Integer, 0, G);
    }
  }

  void assignment() {
    const bool sync = m.options.mode == SyncMode::Sync;
    // At most one graph per drone and stage, or one operation per stage overall.
    for (auto [x, tag] : {std::pair{&u, "stage_launch"}, std::pair{&v, "stage_retrieve"}}) {
      for (int t = 1; t <= T; ++t) {
        if (m.options.fleet_stage_cap) {
          Terms terms;
          for (int d = 1; d <= D; ++d) {
            for (int gi = 0; gi < G; ++gi) {
              auto more = sum_over_edges(*x, gi, t, d);
              terms.insert(terms.end(), more.begin(), more.end());
            }
          }
          row(tag, nm("%s_t%d", tag, t), terms, Sense::Le, 1);
          continue;
        }
        for (int d = 1; d <= D; ++d) {
          Terms terms;
          for (int gi = 0; gi < G; ++gi) {
            auto more = sum_over_edges(*x, gi, t, d);
            terms.insert(terms.end(), more.begin(), more.end());
          }
          row(tag, nm("%s_t%d_d%d", tag, t, d), terms, Sense::Le, 1);
        }
      }
    }
    for (auto [x, tag] : {std::pair{&u, "graph_enter"}, std::pair{&v, "graph_exit"}}) {
      for (int gi = 0; gi < G; ++gi) {
        Terms terms;
        for (int t = 1; t <= T; ++t) {
          for (int d = 1; d <= D; ++d) {
            auto more = sum_over_edges(*x, gi, t, d);
            terms.insert(terms.end(), more.begin(), more.end());
          }
        }
        row(tag, nm("%s_g%d", tag, gid(gi)), terms, Sense::Eq, 1);
      }
    }
    if (sync) {
      for (int gi = 0; gi < G; ++gi) {
        for (int t = 1; t <= T; ++t) {
          for (int d = 1; d <= D; ++d) {
            Terms terms = sum_over_edges(u, gi, t, d);
            auto out = sum_over_edges(v, gi, t, d, -1.0);
            terms.insert(terms.end(), out.begin(), out.end());
            row("same_stage", nm("same_stage_g%d_t%d_d%d", gid(gi), t, d), terms, Sense::Eq, 0);
          }
        }
      }
    } else {
      // Retrieval by the launching drone, never before the launch.
      for (int gi = 0; gi < G; ++gi) {
        for (int d = 1; d <= D; ++d) {
          Terms acc;
          for (int t = 1; t <= T; ++t) {
            auto in_t = sum_over_edges(u, gi, t, d);
            auto out_t = sum_over_edges(v, gi, t, d, -1.0);
            acc.insert(acc.end(), in_t.begin(), in_t.end());
            acc.insert(acc.end(), out_t.begin(), out_t.end());
            if (t < T) {
              row("async_order", nm("async_order_g%d_d%d_t%d", gid(gi), d, t), acc, Sense::Ge, 0);
            } else {
              row("async_pair", nm("async_pair_g%d_d%d", gid(gi), d), acc, Sense::Eq, 0);
            }
          }
        }
      }
      // A drone in flight between t1 and t2 takes no other launch or retrieve.
      const double M = G;
      for (int gi = 0; gi < G; ++gi) {
        for (int d = 1; d <= D; ++d) {
          for (int t1 = 1; t1 <= T; ++t1) {
            for (int t2 = t1 + 1; t2 <= T; ++t2) {
              Terms slack = sum_over_edges(u, gi, t1, d, M);
              auto back = sum_over_edges(v, gi, t2, d, M);
              slack.insert(slack.end(), back.begin(), back.end());
              Terms launches = slack, retrieves = slack;
              for (int g2 = 0; g2 < G; ++g2) {
                for (int t = t1 + 1; t <= t2; ++t) {
                  auto more = sum_over_edges(u, g2, t, d);
                  launches.insert(launches.end(), more.begin(), more.end());
                }
                for (int t = t1; t < t2; ++t) {
                  auto more = sum_over_edges(v, g2, t, d);
                  retrieves.insert(retrieves.end(), more.begin(), more.end());
                }
              }
              row("async_launch_block", nm("async_launch_block_g%d_d%d_t%d_t%d", gid(gi), d, t1, t2), launches,
                  Sense::Le, 2 * M);
              row("async_retrieve_block", nm("async_retrieve_block_g%d_d%d_t%d_t%d", gid(gi), d, t1, t2),
                  retrieves, Sense::Le, 2 * M);
            }
          }
        }
      }
    }
    for (auto [x, tag, in_arc] : {std::tuple{&u, "flow_in", true}, std::tuple{&v, "flow_out", false}}) {
      each_edge([&](int gi, int e) {
        Terms terms;
        for (int t = 1; t <= T; ++t) {
          for (int d = 1; d <= D; ++d) terms.push_back({x->at({gi, e, t, d}), 1});
        }
        for (int f = 0; f < edges(gi); ++f) {
          if (f != e) terms.push_back({in_arc ? z.at({gi, f, e}) : z.at({gi, e, f}), 1});
        }
        terms.push_back({mu.at({gi, e}), -1});
        row(tag, nm("%s_g%d_e%d", tag, gid(gi), e), terms, Sense::Eq, 0);
      });
    }
  }

  void subtour() {
    if (m.options.subtour != Subtour::Mtz) return;
    each_pair([&](int gi, int e, int f) {
      const double n = edges(gi);
      row("mtz", nm("mtz_g%d_e%d_e%d", gid(gi), e, f),
          {{s.at({gi, e}), 1}, {s.at({gi, f}), -1}, {z.at({gi, e, f}), n}}, Sense::Le, n - 1);
    });
  }

  void edge_points() {
    each_edge([&](int gi, int e) {
      const auto& seg = graph(gi).edges[static_cast<std::size_t>(e)].segment;
      const Point dir = seg.c - seg.b;
      const int g = gid(gi);
      row("edge_point", nm("edge_point_g%d_e%d_R_x", g, e), {{Rx.at({gi, e}), 1}, {rho.at({gi, e}), -dir.x}}, Sense::Eq, seg.b.x);
      row("edge_point", nm("edge_point_g%d_e%d_R_y", g, e), {{Ry.at({gi, e}), 1}, {rho.at({gi, e}), -dir.y}}, Sense::Eq, seg.b.y);
      row("edge_point", nm("edge_point_g%d_e%d_L_x", g, e), {{Lx.at({gi, e}), 1}, {lambda.at({gi, e}), -dir.x}}, Sense::Eq, seg.b.x);
      row("edge_point", nm("edge_point_g%d_e%d_L_y", g, e), {{Ly.at({gi, e}), 1}, {lambda.at({gi, e}), -dir.y}}, Sense::Eq, seg.b.y);
    });
  }

  void coverage() {
    each_edge([&](int gi, int e) {
      const int g = gid(gi);
      row("cov_split", nm("cov_split_g%d_e%d", g, e),
          {{rho.at({gi, e}), 1}, {lambda.at({gi, e}), -1}, {numax.at({gi, e}), -1}, {numin.at({gi, e}), 1}}, Sense::Eq, 0);
      row("cov_max", nm("cov_max_g%d_e%d", g, e), {{numax.at({gi, e}), 1}, {entry.at({gi, e}), 1}}, Sense::Le, 1);
      row("cov_min", nm("cov_min_g%d_e%d", g, e), {{numin.at({gi, e}), 1}, {entry.at({gi, e}), -1}}, Sense::Le, 0);
    });
    if (m.visit_mode == VisitMode::PerEdge) {
      each_edge([&](int gi, int e) {
        row("cov_edge", nm("cov_edge_g%d_e%d", gid(gi), e), {{q.at({gi, e}), 1}}, Sense::Ge,
            graph(gi).edges[static_cast<std::size_t>(e)].alpha);
      });
    } else {
      for (int gi = 0; gi < G; ++gi) {
        Terms terms;
        for (int e = 0; e < edges(gi); ++e) {
          terms.push_back({q.at({gi, e}), graph(gi).edges[static_cast<std::size_t>(e)].length()});
        }
        row("cov_graph", nm("cov_graph_g%d", gid(gi)), terms, Sense::Ge, graph(gi).alpha * graph(gi).total_length());
      }
    }
  }

  void add(std::vector<LinearConstraint> rows) {
    for (auto& r : rows) m.linear.push_back(std::move(r));
  }

  void products() {
    each_etd([&](int gi, int e, int t, int d) {
      add(mccormick(pL.at({gi, e, t, d}), u.at({gi, e, t, d}), {{{dL.at({gi, e, t, d}), 1}}, 0}, 0, bm.m_launch,
                    nm("mc_launch_g%d_e%d_t%d_d%d", gid(gi), e, t, d), "mc_launch"));
    });
    each_etd([&](int gi, int e, int t, int d) {
      add(mccormick(pR.at({gi, e, t, d}), v.at({gi, e, t, d}), {{{dR.at({gi, e, t, d}), 1}}, 0}, 0, bm.m_retrieve,
                    nm("mc_retrieve_g%d_e%d_t%d_d%d", gid(gi), e, t, d), "mc_retrieve"));
    });
    each_pair([&](int gi, int e, int f) {
      add(mccormick(pp.at({gi, e, f}), z.at({gi, e, f}), {{{dp.at({gi, e, f}), 1}}, 0},
                    bm.m_pair_lo.at({gid(gi), e, f}), bm.m_pair.at({gid(gi), e, f}),
                    nm("mc_pair_g%d_e%d_e%d", gid(gi), e, f), "mc_pair"));
    });
    each_edge([&](int gi, int e) {
      add(mccormick(pmu.at({gi, e}), mu.at({gi, e}), {{{de.at({gi, e}), 1}}, 0}, 0,
                    graph(gi).edges[static_cast<std::size_t>(e)].length(), nm("mc_edge_g%d_e%d", gid(gi), e),
                    "mc_edge"));
    });
    each_edge([&](int gi, int e) {
      add(mccormick(q.at({gi, e}), mu.at({gi, e}), {{{numax.at({gi, e}), 1}, {numin.at({gi, e}), 1}}, 0}, 0, 1,
                    nm("mc_cover_g%d_e%d", gid(gi), e), "mc_cover"));
    });
  }

  // Drone path of graph gi launched at t1 and retrieved at t2 by d, in drone distance.
  Terms drone_path(int gi, int t1, int t2, int d) const {
    Terms terms = sum_over_edges(pL, gi, t1, d);
    for (int e = 0; e < edges(gi); ++e) {
      for (int f = 0; f < edges(gi); ++f) {
        if (e != f) terms.push_back({pp.at({gi, e, f}), 1});
      }
    }
    for (int e = 0; e < edges(gi); ++e) terms.push_back({pmu.at({gi, e}), 1});
    auto back = sum_over_edges(pR, gi, t2, d);
    terms.insert(terms.end(), back.begin(), back.end());
    return terms;
  }

  void coordination() {
    const double ratio = in.v_d / in.v_m;
    if (m.options.mode == SyncMode::Sync) {
      for (int gi = 0; gi < G; ++gi) {
        const double M = bm.m_op.at(gid(gi));
        for (int t = 1; t <= T; ++t) {
          for (int d = 1; d <= D; ++d) {
            Terms terms = drone_path(gi, t, t, d);
            terms.push_back({dLR.at(t), -ratio});
            auto slack = sum_over_edges(u, gi, t, d, M);
            terms.insert(terms.end(), slack.begin(), slack.end());
            row("dcw", nm("dcw_g%d_t%d_d%d", gid(gi), t, d), terms, Sense::Le, M);
          }
        }
      }
    } else {
      for (int gi = 0; gi < G; ++gi) {
        for (int d = 1; d <= D; ++d) {
          for (int t1 = 1; t1 <= T; ++t1) {
            for (int t2 = t1; t2 <= T; ++t2) {
              const double M = bm.m_op.at(gid(gi)) + (t2 - t1 + 1) * bm.diameter;
              Terms terms = drone_path(gi, t1, t2, d);
              for (int t = t1; t <= t2; ++t) terms.push_back({dLR.at(t), -ratio});
              for (int t = t1; t < t2; ++t) terms.push_back({dRL.at(t), -ratio});
              auto a = sum_over_edges(u, gi, t1, d, M);
              auto b = sum_over_edges(v, gi, t2, d, M);
              terms.insert(terms.end(), a.begin(), a.end());
              terms.insert(terms.end(), b.begin(), b.end());
              row("dcw", nm("dcw_g%d_d%d_t%d_t%d", gid(gi), d, t1, t2), terms, Sense::Le, 2 * M);
            }
          }
        }
      }
    }
    const double cap = m.options.raw_endurance_cap ? in.endurance : in.v_m * in.endurance;
    for (int t = 1; t <= T; ++t) row("capacity", nm("capacity_t%d", t), {{dLR.at(t), 1}}, Sense::Le, cap);
  }

  void distances() {
    each_etd([&](int gi, int e, int t, int d) {
      cone("dist_launch", nm("dist_launch_g%d_e%d_t%d_d%d", gid(gi), e, t, d), {xLx.at(t), xLy.at(t)},
           {Rx.at({gi, e}), Ry.at({gi, e})}, dL.at({gi, e, t, d}));
    });
    each_edge([&](int gi, int e) {
      cone("dist_edge", nm("dist_edge_g%d_e%d", gid(gi), e), {Rx.at({gi, e}), Ry.at({gi, e})},
           {Lx.at({gi, e}), Ly.at({gi, e})}, de.at({gi, e}));
    });
    each_pair([&](int gi, int e, int f) {
      cone("dist_pair", nm("dist_pair_g%d_e%d_e%d", gid(gi), e, f), {Lx.at({gi, e}), Ly.at({gi, e})},
           {Rx.at({gi, f}), Ry.at({gi, f})}, dp.at({gi, e, f}));
    });
    each_etd([&](int gi, int e, int t, int d) {
      cone("dist_retrieve", nm("dist_retrieve_g%d_e%d_t%d_d%d", gid(gi), e, t, d), {Lx.at({gi, e}), Ly.at({gi, e})},
           {xRx.at(t), xRy.at(t)}, dR.at({gi, e, t, d}));
    });
    for (int t = 0; t <= T; ++t) {
      cone("dist_transit", nm("dist_transit_t%d", t), {xRx.at(t), xRy.at(t)}, {xLx.at(t + 1), xLy.at(t + 1)}, dRL.at(t));
    }
    for (int t = 1; t <= T; ++t) {
      cone("dist_operation", nm("dist_operation_t%d", t), {xLx.at(t), xLy.at(t)}, {xRx.at(t), xRy.at(t)}, dLR.at(t));
    }
  }

  void boundary() {
    const int last = T + 1;
    row("boundary", "orig_L_x", {{xLx.at(0), 1}}, Sense::Eq, in.origin.x);
    row("boundary", "orig_L_y", {{xLy.at(0), 1}}, Sense::Eq, in.origin.y);
    row("boundary", "orig_R_x", {{xRx.at(0), 1}}, Sense::Eq, in.origin.x);
    row("boundary", "orig_R_y", {{xRy.at(0), 1}}, Sense::Eq, in.origin.y);
    row("boundary", "dest_L_x", {{xLx.at(last), 1}}, Sense::Eq, in.destination.x);
    row("boundary", "dest_L_y", {{xLy.at(last), 1}}, Sense::Eq, in.destination.y);
    row("boundary", "dest_R_x", {{xRx.at(last), 1}}, Sense::Eq, in.destination.x);
    row("boundary", "dest_R_y", {{xRy.at(last), 1}}, Sense::Eq, in.destination.y);
  }

  Terms all_at(const std::map<Key4, VarId>& x, int t, int d) const {
    Terms terms;
    for (int gi = 0; gi < G; ++gi) {
      auto more = sum_over_edges(x, gi, t, d);
      terms.insert(terms.end(), more.begin(), more.end());
    }
    return terms;
  }

  void valid_inequalities() {
    if (!m.options.valid_inequalities) return;
    const bool sync = m.options.mode == SyncMode::Sync;
    for (int t = 1; t <= T; ++t) {
      Terms terms{{k.at(t), 1}};
      for (int d = 1; d <= D; ++d) {
        for (const auto& [x, c] : all_at(u, t, d)) terms.push_back({x, -c});
      }
      row("vi_count", nm("vi_count_t%d", t), terms, Sense::Eq, 0);
    }
    for (int t = 1; t < T; ++t) {
      row("monotonicity", nm("monotonicity_t%d", t), {{beta.at(t), 1}, {beta.at(t + 1), -1}}, Sense::Le, 0);
    }
    for (int t = 1; t <= T; ++t) {
      Terms terms{{beta.at(t), -static_cast<double>(G)}};
      for (int t2 = 1; t2 < t; ++t2) terms.push_back({k.at(t2), 1});
      row("vi1", nm("vi1_t%d", t), terms, Sense::Ge, 0);
    }
    for (int t = 1; t <= T; ++t) {
      Terms terms{{k.at(t), 1}, {beta.at(t), 1}};
      // Asynchronous stages may close an operation without opening one.
      if (!sync) {
        for (int d = 1; d <= D; ++d) {
          auto more = all_at(v, t, d);
          terms.insert(terms.end(), more.begin(), more.end());
        }
      }
      row("vi2", nm("vi2_t%d", t), terms, Sense::Ge, 1);
    }
    // Drone symmetry only holds when every drone is back on board at each stage.
    if (!sync) return;
    for (auto [x, tag] : {std::pair{&u, "vi3"}, std::pair{&v, "vi4"}}) {
      for (int t = 1; t <= T; ++t) {
        for (int d = 2; d <= D; ++d) {
          Terms terms = all_at(*x, t, d);
          for (const auto& [id, c] : all_at(*x, t, d - 1)) terms.push_back({id, -c});
          row(tag, nm("%s_t%d_d%d", tag, t, d), terms, Sense::Le, 0);
        }
      }
    }
  }

  Model build() {
    variables();
    assignment();
    subtour();
    edge_points();
    coverage();
    products();
    coordination();
    boundary();
    valid_inequalities();
    distances();
    for (int t = 0; t <= T; ++t) m.objective.push_back({dRL.at(t), 1});
    for (int t = 1; t <= T; ++t) m.objective.push_back({dLR.at(t), 1});
    return std::move(m);
  }
};

}  // namespace

VarId Model::var(const std::string& name) const {
  auto it = index.find(name);
  if (it == index.end()) throw std::out_of_range("model has no variable " + name);
  return it->second;
}

BigMTable big_m_bounds(const Instance& in) {
  BigMTable t;
  std::vector<Point> pts{in.origin, in.destination};
  for (const auto& g : in.graphs) pts.insert(pts.end(), g.nodes.begin(), g.nodes.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) t.diameter = std::max(t.diameter, dist(pts[i], pts[j]));
  }
  t.m_launch = t.m_retrieve = t.diameter;
  for (const auto& g : in.graphs) {
    double pairs = 0.0;
    for (const auto& e : g.edges) {
      for (const auto& f : g.edges) {
        if (e.id == f.id) continue;
        const auto& a = e.segment;
        const auto& b = f.segment;
        const double hi = std::max({dist(a.b, b.b), dist(a.b, b.c), dist(a.c, b.b), dist(a.c, b.c)});
        t.m_pair[{g.id, e.id, f.id}] = hi;
        // Exit and entry points may sit inside the edges, so the endpoint
        // minimum is not a valid floor; the segment distance is.
        t.m_pair_lo[{g.id, e.id, f.id}] = segment_distance(a, b);
        pairs += hi;
      }
    }
    t.m_op[g.id] = g.total_length() + t.m_launch + t.m_retrieve + pairs;
  }
  return t;
}

Model build_model(const Instance& in, const ModelOptions& options) { return Builder(in, options).build(); }

Model build_sync_model(const Instance& in, ModelOptions options) {
  options.mode = SyncMode::Sync;
  return build_model(in, options);
}

Model build_async_model(const Instance& in, ModelOptions options) {
  options.mode = SyncMode::Async;
  return build_model(in, options);
}

std::vector<LinearConstraint> mccormick(VarId p, VarId b, const LinExpr& d, double m, double M,
                                        const std::string& name, const std::string& tag) {
  auto with_d = [&](double cp, double cb, double cd) {
    Terms terms{{p, cp}};
    if (cb != 0.0) terms.push_back({b, cb});
    for (const auto& [x, c] : d.terms) terms.push_back({x, cd * c});
    return merge(terms);
  };
  std::vector<LinearConstraint> rows;
  rows.push_back({name + "_ub", tag, with_d(1, -M, 0), Sense::Le, 0});
  rows.push_back({name + "_d", tag, with_d(1, 0, -1), Sense::Le, d.constant});
  rows.push_back({name + "_lb", tag, with_d(1, -m, 0), Sense::Ge, 0});
  rows.push_back({name + "_on", tag, with_d(1, -M, -1), Sense::Ge, d.constant - M});
  return rows;
}

std::optional<SecCut> separate_sec(const std::map<std::pair<int, int>, int>& z_values, const TargetGraph& g) {
  // A set S holds at least |S| arcs exactly when the undirected multigraph of
  // chosen arcs has a cycle on S, so the smallest S is a shortest cycle.
  const int n = static_cast<int>(g.edges.size());
  std::vector<std::vector<int>> mult(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), 0));
  for (const auto& [arc, val] : z_values) {
    const auto [a, b] = arc;
    if (val == 0 || a == b) continue;
    if (a < 0 || b < 0 || a >= n || b >= n) throw std::out_of_range("separate_sec: edge outside the graph");
    ++mult[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    ++mult[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
  }
  int best = n + 1;
  std::vector<int> best_set;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (mult[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] >= 2 && best > 2) {
        best = 2;
        best_set = {a, b};
      }
    }
  }
  for (int root = 0; root < n && best > 3; ++root) {
    std::vector<int> depth(static_cast<std::size_t>(n), -1), parent(static_cast<std::size_t>(n), -1);
    std::vector<int> queue{root};
    depth[static_cast<std::size_t>(root)] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int x = queue[head];
      for (int y = 0; y < n; ++y) {
        if (mult[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] == 0) continue;
        if (depth[static_cast<std::size_t>(y)] < 0) {
          depth[static_cast<std::size_t>(y)] = depth[static_cast<std::size_t>(x)] + 1;
          parent[static_cast<std::size_t>(y)] = x;
          queue.push_back(y);
        } else if (parent[static_cast<std::size_t>(x)] != y) {
          const int len = depth[static_cast<std::size_t>(x)] + depth[static_cast<std::size_t>(y)] + 1;
          if (len < best) {
            std::vector<int> set;
            for (int w = x; w >= 0; w = parent[static_cast<std::size_t>(w)]) set.push_back(w);
            for (int w = y; w >= 0; w = parent[static_cast<std::size_t>(w)]) set.push_back(w);
            std::sort(set.begin(), set.end());
            set.erase(std::unique(set.begin(), set.end()), set.end());
            // Paths meeting before the root close a shorter cycle found from another root.
            if (static_cast<int>(set.size()) == len) {
              best = len;
              best_set = std::move(set);
            }
          }
        }
      }
    }
  }
  if (best_set.empty()) return std::nullopt;
  SecCut cut;
  cut.subset = best_set;
  for (int a : best_set) {
    for (int b : best_set) {
      if (a != b) cut.arcs.push_back({a, b});
    }
  }
  cut.rhs = static_cast<double>(best_set.size()) - 1.0;
  return cut;
}

LinearConstraint sec_row(const Model& m, int graph, const SecCut& cut) {
  LinearConstraint r;
  r.tag = "sec";
  r.name = nm("sec_g%d", graph);
  for (int e : cut.subset) r.name += nm("_e%d", e);
  for (const auto& [a, b] : cut.arcs) r.terms.push_back({m.var(nm("z_g%d_e%d_e%d", graph, a, b)), 1.0});
  r.sense = Sense::Le;
  r.rhs = cut.rhs;
  return r;
}

ModelStats model_stats(const Model& m) {
  ModelStats s;
  for (const auto& v : m.variables) ++s.variables[v.family];
  for (const auto& r : m.linear) ++s.linear[r.tag];
  for (const auto& c : m.soc) ++s.soc[c.tag];
  s.n_variables = static_cast<int>(m.variables.size());
  s.n_linear = static_cast<int>(m.linear.size());
  s.n_soc = static_cast<int>(m.soc.size());
  return s;
}

std::vector<double> model_point(const Model& m, const Instance& in, const FixedCombinatorics& f, const Solution& s) {
  std::vector<double> x(m.variables.size(), 0.0);
  auto set = [&](const std::string& name, double value) { x[static_cast<std::size_t>(m.var(name))] = value; };
  const int T = m.n_stages;

  // Mothership points, with missing stages collapsed onto the last retrieve point.
  std::vector<Point> launch(static_cast<std::size_t>(T) + 2), retrieve(static_cast<std::size_t>(T) + 2);
  launch[0] = retrieve[0] = in.origin;
  for (int t = 1; t <= T; ++t) {
    if (t <= static_cast<int>(s.stages.size())) {
      launch[static_cast<std::size_t>(t)] = s.stages[static_cast<std::size_t>(t - 1)].launch;
      retrieve[static_cast<std::size_t>(t)] = s.stages[static_cast<std::size_t>(t - 1)].retrieve;
    } else {
      launch[static_cast<std::size_t>(t)] = retrieve[static_cast<std::size_t>(t)] = retrieve[static_cast<std::size_t>(t - 1)];
    }
  }
  launch[static_cast<std::size_t>(T) + 1] = retrieve[static_cast<std::size_t>(T) + 1] = in.destination;
  for (int t = 0; t <= T + 1; ++t) {
    set(nm("xL_t%d_x", t), launch[static_cast<std::size_t>(t)].x);
    set(nm("xL_t%d_y", t), launch[static_cast<std::size_t>(t)].y);
    set(nm("xR_t%d_x", t), retrieve[static_cast<std::size_t>(t)].x);
    set(nm("xR_t%d_y", t), retrieve[static_cast<std::size_t>(t)].y);
  }
  // Stored legs, which may exceed the straight distance when the mothership waits.
  const int used = static_cast<int>(s.stages.size());
  for (int t = 0; t <= T; ++t) {
    const double leg = t < used ? s.stages[static_cast<std::size_t>(t)].transit : t == T ? s.final_transit : 0.0;
    set(nm("dRL_t%d", t), leg);
  }
  for (int t = 1; t <= T; ++t) {
    set(nm("dLR_t%d", t), t <= used ? s.stages[static_cast<std::size_t>(t - 1)].operation : 0.0);
  }

  std::vector<int> launches(static_cast<std::size_t>(T) + 1, 0);
  for (const auto& g : in.graphs) {
    const FixedOperation* op = nullptr;
    for (const auto& o : f.operations) {
      if (o.graph == g.id) op = &o;
    }
    const Operation* sop = nullptr;
    for (const auto& o : s.operations) {
      if (o.graph == g.id) sop = &o;
    }
    if (op == nullptr || sop == nullptr) throw std::invalid_argument("model_point: graph without operation");
    ++launches[static_cast<std::size_t>(op->launch_stage)];
    const int n = static_cast<int>(g.edges.size());
    std::vector<Point> R(static_cast<std::size_t>(n)), L(static_cast<std::size_t>(n));
    std::vector<int> visited(static_cast<std::size_t>(n), 0);
    for (int e = 0; e < n; ++e) R[static_cast<std::size_t>(e)] = L[static_cast<std::size_t>(e)] = g.edges[static_cast<std::size_t>(e)].segment.b;
    for (std::size_t k = 0; k < sop->visits.size(); ++k) {
      const auto& vis = sop->visits[k];
      const auto& seg = g.edges[static_cast<std::size_t>(vis.edge)].segment;
      const auto e = static_cast<std::size_t>(vis.edge);
      visited[e] = 1;
      R[e] = lerp(seg, vis.rho);
      L[e] = lerp(seg, vis.lambda);
      set(nm("mu_g%d_e%d", g.id, vis.edge), 1);
      set(nm("entry_g%d_e%d", g.id, vis.edge), vis.forward ? 1 : 0);
      if (m.options.subtour == Subtour::Mtz) set(nm("s_g%d_e%d", g.id, vis.edge), static_cast<double>(k));
      set(nm("rho_g%d_e%d", g.id, vis.edge), vis.rho);
      set(nm("lambda_g%d_e%d", g.id, vis.edge), vis.lambda);
      set(nm("numax_g%d_e%d", g.id, vis.edge), std::max(0.0, vis.rho - vis.lambda));
      set(nm("numin_g%d_e%d", g.id, vis.edge), std::max(0.0, vis.lambda - vis.rho));
      set(nm("q_g%d_e%d", g.id, vis.edge), std::abs(vis.rho - vis.lambda));
      if (k + 1 < sop->visits.size()) set(nm("z_g%d_e%d_e%d", g.id, vis.edge, sop->visits[k + 1].edge), 1);
    }
    const int first = sop->visits.front().edge;
    const int last = sop->visits.back().edge;
    set(nm("u_g%d_e%d_t%d_d%d", g.id, first, op->launch_stage, op->drone), 1);
    set(nm("v_g%d_e%d_t%d_d%d", g.id, last, op->retrieve_stage, op->drone), 1);
    for (int e = 0; e < n; ++e) {
      const auto ue = static_cast<std::size_t>(e);
      set(nm("R_g%d_e%d_x", g.id, e), R[ue].x);
      set(nm("R_g%d_e%d_y", g.id, e), R[ue].y);
      set(nm("L_g%d_e%d_x", g.id, e), L[ue].x);
      set(nm("L_g%d_e%d_y", g.id, e), L[ue].y);
      const double de = dist(R[ue], L[ue]);
      set(nm("de_g%d_e%d", g.id, e), de);
      set(nm("pmu_g%d_e%d", g.id, e), visited[ue] * de);
      for (int e2 = 0; e2 < n; ++e2) {
        if (e2 == e) continue;
        const double dp = dist(L[ue], R[static_cast<std::size_t>(e2)]);
        set(nm("dp_g%d_e%d_e%d", g.id, e, e2), dp);
        set(nm("pp_g%d_e%d_e%d", g.id, e, e2), x[static_cast<std::size_t>(m.var(nm("z_g%d_e%d_e%d", g.id, e, e2)))] * dp);
      }
      for (int t = 1; t <= T; ++t) {
        for (int d = 1; d <= in.n_drones; ++d) {
          const double dl = dist(launch[static_cast<std::size_t>(t)], R[ue]);
          const double dr = dist(L[ue], retrieve[static_cast<std::size_t>(t)]);
          set(nm("dL_g%d_e%d_t%d_d%d", g.id, e, t, d), dl);
          set(nm("dR_g%d_e%d_t%d_d%d", g.id, e, t, d), dr);
          set(nm("pL_g%d_e%d_t%d_d%d", g.id, e, t, d), x[static_cast<std::size_t>(m.var(nm("u_g%d_e%d_t%d_d%d", g.id, e, t, d)))] * dl);
          set(nm("pR_g%d_e%d_t%d_d%d", g.id, e, t, d), x[static_cast<std::size_t>(m.var(nm("v_g%d_e%d_t%d_d%d", g.id, e, t, d)))] * dr);
        }
      }
    }
  }
  if (m.options.valid_inequalities) {
    int before = 0;
    for (int t = 1; t <= T; ++t) {
      set(nm("k_t%d", t), launches[static_cast<std::size_t>(t)]);
      set(nm("beta_t%d", t), before >= static_cast<int>(in.graphs.size()) ? 1 : 0);
      before += launches[static_cast<std::size_t>(t)];
    }
  }
  return x;
}

double PointCheck::max() const { return std::max({linear, soc, bounds, integrality}); }

PointCheck check_point(const Model& m, const std::vector<double>& x) {
  PointCheck c;
  double worst = 0.0;
  auto note = [&](double& slot, double viol, const std::string& name) {
    slot = std::max(slot, viol);
    if (viol > worst) {
      worst = viol;
      c.worst = name;
    }
  };
  auto val = [&](VarId id) { return x.at(static_cast<std::size_t>(id)); };
  for (std::size_t i = 0; i < m.variables.size(); ++i) {
    const auto& v = m.variables[i];
    note(c.bounds, std::max(v.lower - x[i], x[i] - v.upper), v.name);
    if (v.kind != VarKind::Continuous) note(c.integrality, std::abs(x[i] - std::round(x[i])), v.name);
  }
  for (const auto& r : m.linear) {
    double lhs = 0.0;
    for (const auto& [id, a] : r.terms) lhs += a * val(id);
    const double viol = r.sense == Sense::Le ? lhs - r.rhs : r.sense == Sense::Ge ? r.rhs - lhs : std::abs(lhs - r.rhs);
    note(c.linear, viol, r.name);
  }
  for (const auto& k : m.soc) {
    const Point a{val(k.a.first), val(k.a.second)};
    const Point b = k.b ? Point{val(k.b->first), val(k.b->second)} : k.b_fixed;
    note(c.soc, dist(a, b) - val(k.bound), k.name);
  }
  for (const auto& [id, a] : m.objective) c.objective += a * val(id);
  return c;
}

namespace {

void put_terms(std::string& out, const Model& m, const Terms& terms) {
  if (terms.empty()) {
    out += " 0 " + m.variables.front().name;
    return;
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0 && i % 6 == 0) out += "\n   ";
    const auto& [id, c] = terms[i];
    const double a = std::abs(c);
    out += c < 0 ? " - " : (i == 0 ? " " : " + ");
    if (a != 1.0) out += text::fmt(a) + " ";
    out += m.variables[static_cast<std::size_t>(id)].name;
  }
}

const char* sense_text(Sense s) { return s == Sense::Le ? "<=" : s == Sense::Ge ? ">=" : "="; }

}  // namespace

std::string emit_lp(const Model& m) {
  const auto& o = m.options;
  std::string out;
  out += "\\ ammdrpg model\n";
  out += std::string("\\ mode ") + (o.mode == SyncMode::Sync ? "sync" : "async") + " subtour " +
         (o.subtour == Subtour::Mtz ? "mtz" : "sec") + " visit " +
         (m.visit_mode == VisitMode::PerEdge ? "edge" : "graph") + " vi " + (o.valid_inequalities ? "on" : "off") +
         " stage_cap " + (o.fleet_stage_cap ? "fleet" : "drone") + " capacity " +
         (o.raw_endurance_cap ? "endurance" : "distance") + "\n";
  if (o.subtour == Subtour::Sec) out += "\\ subtour elimination cuts are separated lazily and not listed\n";
  out += "Minimize\n obj:";
  put_terms(out, m, m.objective);
  out += "\nSubject To\n";
  for (const auto& r : m.linear) {
    out += " " + r.name + ":";
    put_terms(out, m, r.terms);
    out += std::string(" ") + sense_text(r.sense) + " " + text::fmt(r.rhs) + "\n";
  }
  auto name = [&](VarId id) { return m.variables[static_cast<std::size_t>(id)].name; };
  for (const auto& k : m.soc) {
    const char* axes[2] = {"x", "y"};
    for (int i = 0; i < 2; ++i) {
      const VarId a = i == 0 ? k.a.first : k.a.second;
      out += " aux_" + std::string(axes[i]) + "_" + k.name + ": q" + axes[i] + "_" + k.name + " - " + name(a);
      if (k.b) {
        out += " + " + name(i == 0 ? k.b->first : k.b->second) + " = 0\n";
      } else {
        out += " = " + text::fmt(-(i == 0 ? k.b_fixed.x : k.b_fixed.y)) + "\n";
      }
    }
    out += " " + k.name + ": [ qx_" + k.name + " ^ 2 + qy_" + k.name + " ^ 2 - " + name(k.bound) + " ^ 2 ] <= 0\n";
  }
  out += "Bounds\n";
  for (const auto& v : m.variables) {
    if (v.kind == VarKind::Binary) continue;
    const bool lo = std::isfinite(v.lower), hi = std::isfinite(v.upper);
    if (!lo && !hi) {
      out += " " + v.name + " free\n";
    } else if (lo && hi) {
      out += " " + text::fmt(v.lower) + " <= " + v.name + " <= " + text::fmt(v.upper) + "\n";
    } else if (lo) {
      out += " " + v.name + " >= " + text::fmt(v.lower) + "\n";
    } else {
      out += " -inf <= " + v.name + " <= " + text::fmt(v.upper) + "\n";
    }
  }
  for (const auto& k : m.soc) {
    out += " qx_" + k.name + " free\n";
    out += " qy_" + k.name + " free\n";
  }
  auto listing = [&](const char* title, VarKind kind) {
    std::string body;
    int n = 0;
    for (const auto& v : m.variables) {
      if (v.kind != kind) continue;
      body += (n % 8 == 0 ? (n == 0 ? " " : "\n ") : " ") + v.name;
      ++n;
    }
    if (n > 0) out += std::string(title) + "\n" + body + "\n";
  };
  listing("Binaries", VarKind::Binary);
  listing("Generals", VarKind::Integer);
  out += "End\n";
  return out;
}

std::size_t LpDocument::quadratic_rows() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const LpRow& r) { return !r.squares.empty(); }));
}

namespace {

const std::string kLp = "<lp>";

bool number_token(const std::string& t, double& v) {
  char* end = nullptr;
  v = std::strtod(t.c_str(), &end);
  return end != t.c_str() && *end == '\0';
}

}  // namespace

LpDocument parse_lp(std::string_view text) {
  LpDocument doc;
  std::map<std::string, VarId> ids;
  auto id_of = [&](const std::string& n) {
    auto [it, fresh] = ids.emplace(n, static_cast<VarId>(doc.names.size()));
    if (fresh) doc.names.push_back(n);
    return it->second;
  };
  enum class Part { None, Objective, Rows, Bounds, Binaries, Generals, End } part = Part::None;
  std::vector<std::string> stream;  // objective and row tokens
  std::vector<std::vector<std::string>> bound_lines;
  std::vector<std::string> bin, gen;
  std::size_t start = 0;
  while (start <= text.size() && part != Part::End) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line(text.substr(start, end - start));
    start = end + 1;
    std::vector<std::string> tok;
    {
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) tok.push_back(line.substr(i, j - i));
        i = j;
      }
    }
    if (tok.empty() || tok[0][0] == '\\') {
      if (end == text.size()) break;
      continue;
    }
    if (tok[0] == "Minimize") {
      part = Part::Objective;
    } else if (tok[0] == "Subject" && tok.size() == 2 && tok[1] == "To") {
      stream.push_back(";");
      part = Part::Rows;
    } else if (tok[0] == "Bounds") {
      part = Part::Bounds;
    } else if (tok[0] == "Binaries") {
      part = Part::Binaries;
    } else if (tok[0] == "Generals") {
      part = Part::Generals;
    } else if (tok[0] == "End") {
      part = Part::End;
    } else if (part == Part::Objective || part == Part::Rows) {
      stream.insert(stream.end(), tok.begin(), tok.end());
    } else if (part == Part::Bounds) {
      bound_lines.push_back(tok);
    } else if (part == Part::Binaries) {
      bin.insert(bin.end(), tok.begin(), tok.end());
    } else if (part == Part::Generals) {
      gen.insert(gen.end(), tok.begin(), tok.end());
    } else {
      throw FormatError(kLp, "text outside any section: '" + tok[0] + "'");
    }
    if (end == text.size()) break;
  }
  if (part != Part::End) throw FormatError(kLp, "missing End");

  // Objective tokens, ';', then rows.
  std::size_t i = 0;
  auto read_terms = [&](Terms& lin, std::vector<std::pair<VarId, double>>* sq) {
    double sign = 1.0, coef = 1.0;
    while (i < stream.size()) {
      const auto& t = stream[i];
      if (t == ";" || t == "<=" || t == ">=" || t == "=") return;
      ++i;
      double v;
      if (t == "+") {
        sign = 1.0;
      } else if (t == "-") {
        sign = -1.0;
      } else if (t == "[" || t == "]") {
      } else if (number_token(t, v)) {
        coef = v;
      } else {
        const VarId id = id_of(t);
        if (i + 1 < stream.size() && stream[i] == "^" && stream[i + 1] == "2") {
          if (sq == nullptr) throw FormatError(kLp, "quadratic term outside a row");
          sq->push_back({id, sign * coef});
          i += 2;
        } else {
          lin.push_back({id, sign * coef});
        }
        sign = 1.0;
        coef = 1.0;
      }
    }
  };
  if (i < stream.size() && stream[i] == "obj:") ++i;
  read_terms(doc.objective, nullptr);
  if (i >= stream.size() || stream[i] != ";") throw FormatError(kLp, "malformed objective");
  ++i;
  while (i < stream.size()) {
    LpRow r;
    const auto& head = stream[i++];
    if (head.size() < 2 || head.back() != ':') throw FormatError(kLp, "row without a name near '" + head + "'");
    r.name = head.substr(0, head.size() - 1);
    read_terms(r.terms, &r.squares);
    if (i + 1 >= stream.size()) throw FormatError(kLp, "row " + r.name + " has no right-hand side");
    const auto& s = stream[i++];
    r.sense = s == "<=" ? Sense::Le : s == ">=" ? Sense::Ge : s == "=" ? Sense::Eq : throw FormatError(kLp, "bad sense in " + r.name);
    r.rhs = text::parse_double(stream[i++], kLp);
    doc.rows.push_back(std::move(r));
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (const auto& b : bound_lines) {
    double lo, hi;
    if (b.size() == 2 && b[1] == "free") {
      doc.bounds[id_of(b[0])] = {-inf, inf};
    } else if (b.size() == 5 && b[1] == "<=" && b[3] == "<=") {
      lo = b[0] == "-inf" ? -inf : text::parse_double(b[0], kLp);
      hi = text::parse_double(b[4], kLp);
      doc.bounds[id_of(b[2])] = {lo, hi};
    } else if (b.size() == 3 && b[1] == ">=") {
      doc.bounds[id_of(b[0])] = {text::parse_double(b[2], kLp), inf};
    } else {
      throw FormatError(kLp, "unreadable bound line starting '" + b[0] + "'");
    }
  }
  for (const auto& n : bin) doc.binaries.push_back(id_of(n));
  for (const auto& n : gen) doc.generals.push_back(id_of(n));
  return doc;
}

}  // namespace ammdrpg
