#include "barrier.h"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>

namespace ammdrpg::barrier {

double Program::objective(const std::vector<double>& y) const {
  double v = 0.0;
  for (int j = 0; j < n; ++j) v += c[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
  return v;
}

double Program::max_row(const std::vector<double>& y) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::max(m, r.eval(y));
  return m;
}

double Program::min_cone_margin(const std::vector<double>& y) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& k : cones) m = std::min(m, k.t.eval(y) - std::hypot(k.wx.eval(y), k.wy.eval(y)));
  return m;
}

void normalise_rows(Program& p) {
  for (auto& r : p.rows) {
    double s = 0.0;
    for (const auto& [j, a] : r.terms) s += a * a;
    s = std::sqrt(s);
    if (s == 0.0) continue;
    for (auto& [j, a] : r.terms) a /= s;
    r.constant /= s;
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Barrier merit tau c'y - sum log(-g) - sum log(t^2 - |w|^2); +inf outside.
double merit(const Program& p, const std::vector<double>& y, double tau) {
  double f = tau * p.objective(y);
  for (const auto& r : p.rows) {
    const double g = r.eval(y);
    if (!(g < 0.0)) return kInf;
    f -= std::log(-g);
  }
  for (const auto& k : p.cones) {
    const double t = k.t.eval(y);
    const double w = std::hypot(k.wx.eval(y), k.wy.eval(y));
    if (!(t > w)) return kInf;
    f -= std::log(t - w) + std::log(t + w);
  }
  return f;
}

// merit(b) - merit(a) evaluated term by term so that large tau c'y offsets
// do not swamp the barrier changes; +inf if b is outside the domain.
double merit_change(const Program& p, const std::vector<double>& a, const std::vector<double>& b, double tau) {
  double d = 0.0;
  for (int j = 0; j < p.n; ++j) {
    d += tau * p.c[static_cast<std::size_t>(j)] * (b[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j)]);
  }
  for (const auto& r : p.rows) {
    const double gb = r.eval(b);
    if (!(gb < 0.0)) return kInf;
    d -= std::log(gb / r.eval(a));
  }
  for (const auto& k : p.cones) {
    const double tb = k.t.eval(b);
    const double wb = std::hypot(k.wx.eval(b), k.wy.eval(b));
    if (!(tb > wb)) return kInf;
    const double ta = k.t.eval(a);
    const double wa = std::hypot(k.wx.eval(a), k.wy.eval(a));
    d -= std::log((tb - wb) / (ta - wa)) + std::log((tb + wb) / (ta + wa));
  }
  return d;
}

struct Linearisation {
  Eigen::VectorXd grad;
  std::vector<Eigen::Triplet<double>> hess;
};

void add_outer(std::vector<Eigen::Triplet<double>>& h, const std::vector<std::pair<int, double>>& a,
               const std::vector<std::pair<int, double>>& b, double s) {
  for (const auto& [i, ai] : a) {
    for (const auto& [j, bj] : b) h.emplace_back(i, j, s * ai * bj);
  }
}

Linearisation linearise(const Program& p, const std::vector<double>& y, double tau) {
  Linearisation L;
  L.grad = Eigen::VectorXd::Zero(p.n);
  for (int j = 0; j < p.n; ++j) L.grad[j] = tau * p.c[static_cast<std::size_t>(j)];
  for (const auto& r : p.rows) {
    const double g = r.eval(y);
    for (const auto& [j, a] : r.terms) L.grad[j] += a / (-g);
    add_outer(L.hess, r.terms, r.terms, 1.0 / (g * g));
  }
  for (const auto& k : p.cones) {
    // z = (t, wx, wy), s = z'Jz, phi = -log s.
    const double z[3] = {k.t.eval(y), k.wx.eval(y), k.wy.eval(y)};
    const double jz[3] = {z[0], -z[1], -z[2]};
    const double s = z[0] * z[0] - z[1] * z[1] - z[2] * z[2];
    const std::vector<std::pair<int, double>>* rows[3] = {&k.t.terms, &k.wx.terms, &k.wy.terms};
    for (int a = 0; a < 3; ++a) {
      for (const auto& [j, m] : *rows[a]) L.grad[j] += -2.0 * jz[a] / s * m;
    }
    static constexpr double J[3] = {1.0, -1.0, -1.0};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        double h = 4.0 * jz[a] * jz[b] / (s * s);
        if (a == b) h -= 2.0 * J[a] / s;
        if (h != 0.0) add_outer(L.hess, *rows[a], *rows[b], h);
      }
    }
  }
  return L;
}

bool solve_newton(int n, const Linearisation& L, Eigen::VectorXd& dx) {
  double reg = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (n <= 150) {
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
      for (const auto& t : L.hess) H(t.row(), t.col()) += t.value();
      const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      if (reg > 0.0) H.diagonal().array() += reg * scale;
      Eigen::LLT<Eigen::MatrixXd> llt(H);
      if (llt.info() == Eigen::Success) {
        dx = llt.solve(-L.grad);
        if (dx.allFinite()) return true;
      }
    } else {
      Eigen::SparseMatrix<double> H(n, n);
      H.setFromTriplets(L.hess.begin(), L.hess.end());
      double scale = 1.0;
      for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(H.coeff(j, j)));
      if (reg > 0.0) {
        for (int j = 0; j < n; ++j) H.coeffRef(j, j) += reg * scale;
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
      if (ldlt.info() == Eigen::Success) {
        dx = ldlt.solve(-L.grad);
        if (dx.allFinite()) return true;
      }
    }
    reg = reg == 0.0 ? 1e-14 : reg * 100.0;
  }
  return false;
}

}  // namespace

Result minimise(const Program& p, std::vector<double> y, const Options& opt) {
  Result res;
  const double nu = std::max(1.0, p.nu());
  double tau = opt.tau0;
  for (int outer = 0;; ++outer) {
    double f = merit(p, y, tau);
    if (!std::isfinite(f)) break;  // caller must start strictly feasible
    int inner = 0;
    for (;;) {
      if (res.newton >= opt.max_newton) {
        res.y = y;
        res.gap_bound = nu / tau;
        return res;
      }
      const auto L = linearise(p, y, tau);
      Eigen::VectorXd dx;
      if (!solve_newton(p.n, L, dx)) break;
      const double decrement = -L.grad.dot(dx);
      if (decrement / 2.0 <= 1e-7 || ++inner > 200) break;
      ++res.newton;
      // Largest step keeping the linear rows strictly feasible.
      double step = 1.0;
      for (const auto& r : p.rows) {
        double slope = 0.0;
        for (const auto& [j, a] : r.terms) slope += a * dx[j];
        if (slope > 0.0) step = std::min(step, 0.99 * (-r.eval(y)) / slope);
      }
      std::vector<double> trial(y.size());
      double change = kInf;
      bool accepted = false;
      while (step > 1e-16) {
        for (std::size_t j = 0; j < y.size(); ++j) trial[j] = y[j] + step * dx[static_cast<Eigen::Index>(j)];
        change = merit_change(p, y, trial, tau);
        if (change <= -0.25 * step * decrement) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;  // centred as far as the arithmetic resolves
      y.swap(trial);
      f += change;
      if (opt.keep_trace) res.trace.push_back({outer, f, p.objective(y)});
    }
    res.gap_bound = nu / tau;
    if (opt.stop && opt.stop(y, nu / tau)) {
      res.stopped = true;
      break;
    }
    if (nu / tau <= opt.gap_target) {
      res.converged = true;
      break;
    }
    tau *= opt.tau_factor;
  }
  res.y = y;
  return res;
}

}  // namespace ammdrpg::barrier
