#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "ammdrpg/convex_sub.h"
#include "ammdrpg/instance.h"
#include "ammdrpg/solution.h"

namespace ammdrpg {

using VarId = int;  // index into Model::variables

enum class VarKind { Binary, Integer, Continuous };

struct VarMeta {
  std::string name;    // structured label, e.g. u_g0_e1_t2_d1
  std::string family;  // label prefix, e.g. u
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;
};

enum class Sense { Le, Eq, Ge };

using Terms = std::vector<std::pair<VarId, double>>;

struct LinearConstraint {
  std::string name;
  std::string tag;  // constraint family
  Terms terms;      // no repeated VarId
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

// ||a - b|| <= bound, with b either a variable pair or a fixed point.
struct SocConstraint {
  std::string name;
  std::string tag;
  std::pair<VarId, VarId> a;
  std::optional<std::pair<VarId, VarId>> b;
  Point b_fixed;
  VarId bound = 0;
};

enum class Subtour { Mtz, Sec };

struct ModelOptions {
  SyncMode mode = SyncMode::Sync;
  Subtour subtour = Subtour::Mtz;
  bool valid_inequalities = false;
  // One launch and one retrieve per stage across the fleet.
  bool fleet_stage_cap = false;
  // Operation distance bounded by the endurance itself.
  bool raw_endurance_cap = false;
};

struct Model {
  ModelOptions options;
  VisitMode visit_mode = VisitMode::PerEdge;
  int n_stages = 0;  // working stages 1..n_stages; 0 and n_stages+1 hold orig and dest
  std::vector<VarMeta> variables;
  std::vector<LinearConstraint> linear;
  std::vector<SocConstraint> soc;
  Terms objective;  // minimised

  // Throws std::out_of_range for unknown names.
  VarId var(const std::string& name) const;

  std::map<std::string, VarId> index;
};

struct BigMTable {
  double m_launch = 0.0;
  double m_retrieve = 0.0;
  double diameter = 0.0;  // all graph vertices plus orig and dest
  // Keyed by (graph id, edge id, other edge id) for ordered pairs.
  std::map<std::tuple<int, int, int>, double> m_pair;
  std::map<std::tuple<int, int, int>, double> m_pair_lo;
  std::map<int, double> m_op;  // by graph id
};

BigMTable big_m_bounds(const Instance& instance);

Model build_model(const Instance& instance, const ModelOptions& options);
Model build_sync_model(const Instance& instance, ModelOptions options = {});
Model build_async_model(const Instance& instance, ModelOptions options = {});

// The four envelope rows for p = b * d with d in [m, M]; `d` may carry a constant.
struct LinExpr {
  Terms terms;
  double constant = 0.0;
};
std::vector<LinearConstraint> mccormick(VarId p, VarId b, const LinExpr& d, double m, double M,
                                        const std::string& name, const std::string& tag);

// Violated subtour cut sum_{e != e' in S} z <= |S| - 1.
struct SecCut {
  std::vector<int> subset;                 // edge ids, ascending
  std::vector<std::pair<int, int>> arcs;   // every ordered pair inside the subset
  double rhs = 0.0;
};

// Smallest edge set S of g holding at least |S| chosen arcs, or nothing when
// every SEC holds. Keys of `z_values` are (edge, next edge).
std::optional<SecCut> separate_sec(const std::map<std::pair<int, int>, int>& z_values, const TargetGraph& g);

// The cut as a row over the z variables of graph `graph` in m.
LinearConstraint sec_row(const Model& m, int graph, const SecCut& cut);

std::string emit_lp(const Model& m);

// Minimal reader for the LP subset written by emit_lp.
struct LpRow {
  std::string name;
  Terms terms;                                    // indices into LpDocument::names
  std::vector<std::pair<VarId, double>> squares;  // coefficient of var^2
  Sense sense = Sense::Le;
  double rhs = 0.0;
};
struct LpDocument {
  std::vector<std::string> names;  // first appearance order
  Terms objective;
  std::vector<LpRow> rows;
  std::map<VarId, std::pair<double, double>> bounds;
  std::vector<VarId> binaries;
  std::vector<VarId> generals;

  std::size_t quadratic_rows() const;
};
LpDocument parse_lp(std::string_view text);

struct ModelStats {
  std::map<std::string, int> variables;  // by family
  std::map<std::string, int> linear;     // by tag
  std::map<std::string, int> soc;        // by tag
  int n_variables = 0;
  int n_linear = 0;
  int n_soc = 0;
};
ModelStats model_stats(const Model& m);

// Values for every model variable that reproduce a solved skeleton; stages
// beyond the skeleton collapse onto the last retrieve point.
std::vector<double> model_point(const Model& m, const Instance& instance, const FixedCombinatorics& f,
                                const Solution& s);

struct PointCheck {
  double linear = 0.0;     // worst row violation
  double soc = 0.0;        // worst norm excess
  double bounds = 0.0;     // worst bound violation
  double integrality = 0.0;
  std::string worst;       // name of the worst row or variable
  double objective = 0.0;
  double max() const;
};
PointCheck check_point(const Model& m, const std::vector<double>& x);

}  // namespace ammdrpg
