#pragma once

// Log-barrier interior-point method for small programs of the form
//   minimise c'y  s.t.  a_i'y + b_i <= 0,  ||(wx_k(y), wy_k(y))|| <= t_k(y)
// with affine a, w, t. Internal to the convex subproblem solver.

#include <functional>
#include <utility>
#include <vector>

namespace ammdrpg::barrier {

struct Affine {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  double eval(const std::vector<double>& y) const {
    double v = constant;
    for (const auto& [j, a] : terms) v += a * y[static_cast<std::size_t>(j)];
    return v;
  }
  void add(int j, double a) {
    if (a != 0.0) terms.emplace_back(j, a);
  }
};

struct Cone {
  Affine t;
  Affine wx;
  Affine wy;
};

struct Program {
  int n = 0;
  std::vector<double> c;
  std::vector<Affine> rows;  // each row <= 0
  std::vector<Cone> cones;

  double objective(const std::vector<double>& y) const;
  // Largest row value and smallest cone margin t - ||w||.
  double max_row(const std::vector<double>& y) const;
  double min_cone_margin(const std::vector<double>& y) const;
  double nu() const { return static_cast<double>(rows.size() + 2 * cones.size()); }
};

struct Options {
  double gap_target = 1e-8;
  int max_newton = 4000;
  double tau0 = 1.0;
  double tau_factor = 10.0;
  // Called after every centring with the current gap bound; returning true
  // stops early.
  std::function<bool(const std::vector<double>&, double)> stop;
  bool keep_trace = false;
};

struct Sample {
  int outer;
  double merit;
  double objective;
};

struct Result {
  std::vector<double> y;
  double gap_bound = 0.0;
  int newton = 0;
  bool converged = false;
  bool stopped = false;
  std::vector<Sample> trace;
};

// y0 must be strictly feasible.
Result minimise(const Program& p, std::vector<double> y0, const Options& opt);

// Rescales each row to unit coefficient norm.
void normalise_rows(Program& p);

}  // namespace ammdrpg::barrier
