// Command-line front end: generate, solve, validate, emit, render, bench.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ammdrpg/error.h"
#include "ammdrpg/exact.h"
#include "ammdrpg/matheuristic.h"
#include "ammdrpg/model_ir.h"
#include "ammdrpg/render.h"
#include "ammdrpg/text.h"
#include "ammdrpg/validate.h"

using namespace ammdrpg;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kInfeasible = 3, kLimits = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << body)) throw UsageError("cannot write " + path);
}

const std::map<std::string, SyncMode> kModes{{"sync", SyncMode::Sync}, {"async", SyncMode::Async}};
const std::map<std::string, VisitMode> kVisits{{"edge", VisitMode::PerEdge}, {"graph", VisitMode::WholeGraph}};
const std::map<std::string, Subtour> kSubtours{{"mtz", Subtour::Mtz}, {"sec", Subtour::Sec}};
const std::map<std::string, bool> kSwitch{{"on", true}, {"off", false}};

std::string census_line(const Instance& in) {
  const auto s = model_stats(build_sync_model(in));
  char buf[160];
  std::snprintf(buf, sizeof buf, "graphs %zu edges %zu drones %d | sync model: %d variables, %d linear rows, %d cones",
                in.graphs.size(), in.total_edges(), in.n_drones, s.n_variables, s.n_linear, s.n_soc);
  return buf;
}

Instance load_checked(const std::string& path) {
  auto in = load_instance(read_file(path));
  const auto bad = validate_instance(in);
  if (!bad.empty()) {
    throw FormatError(path, std::string(to_string(bad.front().code)) + " at " + bad.front().location);
  }
  return in;
}

struct Cell {
  int graphs = 0, drones = 0;
  double endurance = 0;
  std::uint64_t seed = 0;
  std::string engine, objective, runtime, valid;
  double value = 0;
  bool ok = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mothership and drones routing over target graphs"};
  app.require_subcommand(1);

  // generate
  GridInstanceParams gen;
  std::string gen_visit = "edge", gen_out;
  double side = 100.0;
  auto* generate = app.add_subcommand("generate", "Write a seeded grid-graph instance");
  generate->add_option("--graphs", gen.n_graphs, "Number of target graphs")->check(CLI::PositiveNumber);
  generate->add_option("--drones", gen.n_drones, "Fleet size")->check(CLI::PositiveNumber);
  generate->add_option("--endurance", gen.endurance, "Drone endurance (time)")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--side", side, "Side of the square bounding box")->check(CLI::PositiveNumber);
  generate->add_option("--visit", gen_visit, "Coverage rule")->check(CLI::IsMember({"edge", "graph"}));
  generate->add_option("-o,--out", gen_out, "Instance file (default stdout)");

  // solve
  std::string visit;
  std::string instance_path, solution_path, report_path, warm_path, engine = "matheuristic", mode = "sync";
  double tol = 1e-6;
  MatheuristicParams mp;
  auto* solve = app.add_subcommand("solve", "Solve an instance and validate the result");
  solve->add_option("-i,--instance", instance_path, "Instance file")->required();
  solve->add_option("--engine", engine, "matheuristic or exact")->check(CLI::IsMember({"matheuristic", "exact"}));
  solve->add_option("--mode", mode, "sync or async")->check(CLI::IsMember({"sync", "async"}));
  solve->add_option("--tol", tol, "Feasibility tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--maxseed", mp.maxseed, "Matheuristic seeds")->check(CLI::PositiveNumber);
  solve->add_option("--maxit", mp.maxit, "Matheuristic merge attempts per seed")->check(CLI::PositiveNumber);
  solve->add_option("--seed", mp.first_seed, "First matheuristic seed");
  solve->add_option("--visit", visit, "Override the coverage rule")->check(CLI::IsMember({"edge", "graph"}));
  solve->add_flag("--strict-fleet", mp.strict_fleet, "Clusters strictly smaller than the fleet");
  solve->add_option("-o,--out", solution_path, "Solution file (default stdout)");
  solve->add_option("--report", report_path, "Validation report file");
  solve->add_option("--emit-warmstart", warm_path, "Write the fixed binaries as a warm start");

  // validate
  std::string check_solution_path;
  auto* validate = app.add_subcommand("validate", "Check a solution against an instance");
  validate->add_option("-i,--instance", instance_path, "Instance file")->required();
  validate->add_option("-s,--solution", check_solution_path, "Solution file")->required();
  validate->add_option("--tol", tol, "Feasibility tolerance")->check(CLI::PositiveNumber);
  validate->add_option("--report", report_path, "Machine-readable report file");

  // emit
  std::string lp_path, subtour = "mtz", vi = "off";
  bool literal_cap = false, literal_capacity = false;
  auto* emit = app.add_subcommand("emit", "Write the model in LP format");
  emit->add_option("-i,--instance", instance_path, "Instance file")->required();
  emit->add_option("--mode", mode, "sync or async")->check(CLI::IsMember({"sync", "async"}));
  emit->add_option("--subtour", subtour, "mtz or sec")->check(CLI::IsMember({"mtz", "sec"}));
  emit->add_option("--vi", vi, "Valid inequalities on or off")->check(CLI::IsMember({"on", "off"}));
  emit->add_option("--visit", visit, "Override the coverage rule")->check(CLI::IsMember({"edge", "graph"}));
  emit->add_flag("--fleet-stage-cap", literal_cap, "One launch and one retrieve per stage over the fleet");
  emit->add_flag("--raw-endurance-cap", literal_capacity, "Operation distance bounded by the endurance itself");
  emit->add_option("-o,--out", lp_path, "LP file (default stdout)");
  emit->add_option("--warmstart", warm_path, "Also write a matheuristic warm start");

  // render
  std::string svg_path;
  auto* render = app.add_subcommand("render", "Draw a solution as SVG");
  render->add_option("-i,--instance", instance_path, "Instance file")->required();
  render->add_option("-s,--solution", check_solution_path, "Solution file")->required();
  render->add_option("-o,--out", svg_path, "SVG file (default stdout)");

  // bench
  std::vector<int> b_graphs{1, 2}, b_drones{1, 2};
  std::vector<double> b_endurance{20.0};
  std::vector<std::uint64_t> b_seeds{1};
  std::string b_engine = "both", b_table, b_matrix, b_instance, timing = "on";
  auto* bench = app.add_subcommand("bench", "Run a sweep and tabulate objective, runtime and validity");
  bench->add_option("--graphs", b_graphs, "Graph counts")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_option("--drones", b_drones, "Fleet sizes")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_option("--endurance", b_endurance, "Endurance values")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_option("--seeds", b_seeds, "Instance seeds")->delimiter(',');
  bench->add_option("--side", side, "Side of the generated bounding box")->check(CLI::PositiveNumber);
  bench->add_option("--visit", gen_visit, "Coverage rule")->check(CLI::IsMember({"edge", "graph"}));
  bench->add_option("--instance", b_instance, "Fixed instance instead of generated ones");
  bench->add_option("--engine", b_engine, "matheuristic, exact or both")
      ->check(CLI::IsMember({"matheuristic", "exact", "both"}));
  bench->add_option("--tol", tol, "Feasibility tolerance")->check(CLI::PositiveNumber);
  bench->add_option("--timing", timing, "Report runtimes (off gives reproducible tables)")
      ->check(CLI::IsMember({"on", "off"}));
  bench->add_option("--table", b_table, "Results table (default stdout)");
  bench->add_option("--matrix", b_matrix, "Drones x endurance mean-objective matrix (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) {
      gen.visit_mode = kVisits.at(gen_visit);
      gen.bbox = {{0.0, 0.0}, {side, side}};
      const auto in = generate_grid_instance(gen);
      write_file(gen_out, save_instance(in));
      std::cerr << census_line(in) << "\n";
      return kOk;
    }

    if (*solve) {
      auto in = load_checked(instance_path);
      if (!visit.empty()) in.visit_mode = kVisits.at(visit);
      const auto m = kModes.at(mode);
      Solution sol;
      FixedCombinatorics skeleton;
      if (engine == "exact") {
        const auto r = solve_exact(in, m, {}, tol);
        sol = r.solution;
        skeleton = r.skeleton;
      } else {
        mp.tol = tol;
        mp.mode = m;
        const auto r = run_matheuristic(in, mp);
        sol = r.solution;
        skeleton = r.skeleton;
      }
      const auto rep = check_solution(in, sol, tol);
      write_file(solution_path, save_solution(sol));
      if (!report_path.empty()) write_file(report_path, save_report(rep));
      if (!warm_path.empty()) {
        ModelOptions o;
        o.mode = m;
        write_file(warm_path, save_warmstart(in, skeleton, sol, o));
      }
      std::cerr << "objective " << text::fmt(sol.objective) << "\n" << report_table(rep);
      return rep.pass() ? kOk : kFailed;
    }

    if (*validate) {
      const auto in = load_checked(instance_path);
      const auto sol = load_solution(read_file(check_solution_path));
      if (sol.instance_fingerprint != instance_fingerprint(in)) {
        throw UsageError("solution was computed for a different instance");
      }
      const auto rep = check_solution(in, sol, tol);
      std::cout << report_table(rep);
      if (!report_path.empty()) write_file(report_path, save_report(rep));
      return rep.pass() ? kOk : kInfeasible;
    }

    if (*emit) {
      auto in = load_checked(instance_path);
      if (!visit.empty()) in.visit_mode = kVisits.at(visit);
      ModelOptions o;
      o.mode = kModes.at(mode);
      o.subtour = kSubtours.at(subtour);
      o.valid_inequalities = kSwitch.at(vi);
      o.fleet_stage_cap = literal_cap;
      o.raw_endurance_cap = literal_capacity;
      const auto model = build_model(in, o);
      write_file(lp_path, emit_lp(model));
      if (!warm_path.empty()) {
        MatheuristicParams p;
        p.mode = o.mode;
        const auto r = run_matheuristic(in, p);
        write_file(warm_path, save_warmstart(in, r.skeleton, r.solution, o));
      }
      const auto s = model_stats(model);
      std::cerr << s.n_variables << " variables, " << s.n_linear << " linear rows, " << s.n_soc << " cones\n";
      return kOk;
    }

    if (*render) {
      const auto in = load_checked(instance_path);
      const auto sol = load_solution(read_file(check_solution_path));
      if (sol.instance_fingerprint != instance_fingerprint(in)) {
        throw UsageError("solution was computed for a different instance");
      }
      write_file(svg_path, render_svg(in, sol));
      return kOk;
    }

    if (*bench) {
      std::vector<Cell> cells;
      const bool fixed = !b_instance.empty();
      const Instance base = fixed ? load_checked(b_instance) : Instance{};
      const std::vector<int> graph_counts = fixed ? std::vector<int>{static_cast<int>(base.graphs.size())} : b_graphs;
      const std::vector<std::uint64_t> seeds = fixed ? std::vector<std::uint64_t>{0} : b_seeds;
      std::vector<std::string> engines;
      if (b_engine != "exact") engines.push_back("matheuristic");
      if (b_engine != "matheuristic") engines.push_back("exact");
      for (int g : graph_counts) {
        for (int d : b_drones) {
          for (double n : b_endurance) {
            for (auto seed : seeds) {
              Instance in = base;
              if (!fixed) {
                GridInstanceParams p;
                p.seed = seed;
                p.n_graphs = g;
                p.bbox = {{0.0, 0.0}, {side, side}};
                p.visit_mode = kVisits.at(gen_visit);
                in = generate_grid_instance(p);
              }
              in.n_drones = d;
              in.endurance = n;
              for (const auto& e : engines) {
                Cell c{g, d, n, seed, e, "", "", "-", 0, false};
                const auto start = std::chrono::steady_clock::now();
                try {
                  Solution sol;
                  if (e == "exact") {
                    ExactLimits lim;
                    lim.max_drones = std::max(lim.max_drones, d);
                    sol = solve_exact(in, SyncMode::Sync, lim, tol).solution;
                  } else {
                    MatheuristicParams p;
                    p.tol = tol;
                    sol = run_matheuristic(in, p).solution;
                  }
                  c.value = sol.objective;
                  c.objective = text::fmt(sol.objective);
                  c.valid = check_solution(in, sol, tol).pass() ? "pass" : "fail";
                  c.ok = c.valid == "pass";
                } catch (const InfeasibleError&) {
                  c.objective = "INF";
                } catch (const LimitsExceededError&) {
                  c.objective = "LIMITS";
                } catch (const std::exception& ex) {
                  c.objective = "ERR";
                  std::cerr << "cell failed: " << ex.what() << "\n";
                }
                const double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.3f", secs);
                c.runtime = timing == "on" ? buf : "-";
                cells.push_back(c);
              }
            }
          }
        }
      }
      std::string table = "graphs,drones,endurance,visit,seed,engine,objective,runtime_s,valid\n";
      for (const auto& c : cells) {
        table += std::to_string(c.graphs) + "," + std::to_string(c.drones) + "," + text::fmt(c.endurance) + "," +
                 (fixed ? (base.visit_mode == VisitMode::PerEdge ? "edge" : "graph") : gen_visit) + "," +
                 std::to_string(c.seed) + "," + c.engine + "," + c.objective + "," + c.runtime + "," + c.valid + "\n";
      }
      // Mean objective per drones x endurance; the matheuristic unless only exact was run.
      const std::string focus = engines.front();
      std::string matrix = "drones\\endurance";
      for (double n : b_endurance) matrix += "," + text::fmt(n);
      matrix += "\n";
      for (int d : b_drones) {
        matrix += std::to_string(d);
        for (double n : b_endurance) {
          double sum = 0;
          int count = 0;
          bool inf = false;
          for (const auto& c : cells) {
            if (c.engine != focus || c.drones != d || c.endurance != n) continue;
            if (c.ok) {
              sum += c.value;
              ++count;
            } else if (c.objective == "INF") {
              inf = true;
            }
          }
          matrix += "," + (inf ? std::string("INF") : count == 0 ? std::string("-") : text::fmt(sum / count));
        }
        matrix += "\n";
      }
      write_file(b_table, table);
      write_file(b_matrix, matrix);
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const LimitsExceededError& e) {
    std::cerr << "limits exceeded: " << e.what() << "\n";
    return kLimits;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
