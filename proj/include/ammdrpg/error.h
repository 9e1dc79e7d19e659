#pragma once

#include <stdexcept>
#include <string>

namespace ammdrpg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document. `path` names the offending field, e.g. "fleet.v_d".
class FormatError : public Error {
 public:
  FormatError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what, int graph = -1)
      : Error(what), graph_(graph) {}
  // Graph id that caused the failure, or -1 when not attributable.
  int graph() const { return graph_; }

 private:
  int graph_;
};

class NonConvergedError : public Error {
 public:
  NonConvergedError(double tol, int iterations)
      : Error("no convergence to tolerance " + std::to_string(tol) + " after " +
              std::to_string(iterations) + " iterations"),
        tol_(tol),
        iterations_(iterations) {}
  double tol() const { return tol_; }
  int iterations() const { return iterations_; }

 private:
  double tol_;
  int iterations_;
};

class LimitsExceededError : public Error {
 public:
  using Error::Error;
};

}  // namespace ammdrpg
