#include "ammdrpg/solution.h"

#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "ammdrpg/error.h"
#include "ammdrpg/text.h"

namespace ammdrpg {

std::string_view to_string(SyncMode m) { return m == SyncMode::Sync ? "sync" : "async"; }

double Solution::recomputed_objective() const {
  double total = final_transit;
  for (const auto& st : stages) {
    total += st.transit + st.operation;
  }
  return total;
}

std::string save_solution(const Solution& s) {
  using text::fmt;
  std::ostringstream out;
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016" PRIx64, s.instance_fingerprint);
  out << "ammdrpg-solution v1\n";
  out << "mode " << to_string(s.mode) << '\n';
  out << "instance " << hex << '\n';
  out << "objective " << fmt(s.objective) << '\n';
  out << "origin " << fmt(s.origin.x) << ' ' << fmt(s.origin.y) << '\n';
  out << "destination " << fmt(s.destination.x) << ' ' << fmt(s.destination.y) << '\n';
  out << "stages " << s.stages.size() << '\n';
  for (std::size_t t = 0; t < s.stages.size(); ++t) {
    const auto& st = s.stages[t];
    out << "stage " << t + 1 << '\n';
    out << "  launch " << fmt(st.launch.x) << ' ' << fmt(st.launch.y) << '\n';
    out << "  retrieve " << fmt(st.retrieve.x) << ' ' << fmt(st.retrieve.y) << '\n';
    out << "  transit " << fmt(st.transit) << '\n';
    out << "  operation " << fmt(st.operation) << '\n';
    out << "end\n";
  }
  out << "final_transit " << fmt(s.final_transit) << '\n';
  out << "operations " << s.operations.size() << '\n';
  for (const auto& op : s.operations) {
    out << "operation\n";
    out << "  graph " << op.graph << '\n';
    out << "  drone " << op.drone << '\n';
    out << "  launch_stage " << op.launch_stage << '\n';
    out << "  retrieve_stage " << op.retrieve_stage << '\n';
    out << "  visits " << op.visits.size() << '\n';
    for (const auto& v : op.visits) {
      out << "    visit " << v.edge << ' ' << fmt(v.rho) << ' ' << fmt(v.lambda) << ' '
          << (v.forward ? "forward" : "backward") << '\n';
    }
    out << "end\n";
  }
  return out.str();
}

namespace {

Point read_point(text::Reader& r, const std::string& key, const std::string& path) {
  const auto v = r.expect(key, path, 2);
  return {text::parse_double(v[0], path + ".x"), text::parse_double(v[1], path + ".y")};
}

double read_scalar(text::Reader& r, const std::string& key, const std::string& path) {
  return text::parse_double(r.expect(key, path, 1)[0], path);
}

int read_int(text::Reader& r, const std::string& key, const std::string& path) {
  return static_cast<int>(text::parse_int(r.expect(key, path, 1)[0], path));
}

std::size_t read_count(text::Reader& r, const std::string& key, const std::string& path) {
  const int n = read_int(r, key, path);
  if (n < 0) {
    throw FormatError(path, "negative count");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

Solution load_solution(std::string_view doc) {
  text::Reader r(doc);
  if (r.done()) {
    throw FormatError("header", "empty document");
  }
  const auto header = r.next();
  if (header.size() != 2 || header[0] != "ammdrpg-solution") {
    throw FormatError("header", "expected 'ammdrpg-solution v1'");
  }
  if (header[1] != "v1") {
    throw FormatError("header", "unknown version '" + header[1] + "'");
  }
  Solution s;
  const auto mode = r.expect("mode", "mode", 1)[0];
  if (mode == "sync") {
    s.mode = SyncMode::Sync;
  } else if (mode == "async") {
    s.mode = SyncMode::Async;
  } else {
    throw FormatError("mode", "expected 'sync' or 'async'");
  }
  const auto fp = r.expect("instance", "instance", 1)[0];
  char* end = nullptr;
  s.instance_fingerprint = std::strtoull(fp.c_str(), &end, 16);
  if (fp.size() != 16 || *end != '\0') {
    throw FormatError("instance", "expected 16 hex digits");
  }
  s.objective = read_scalar(r, "objective", "objective");
  s.origin = read_point(r, "origin", "origin");
  s.destination = read_point(r, "destination", "destination");
  const auto n_stages = read_count(r, "stages", "stages");
  for (std::size_t t = 0; t < n_stages; ++t) {
    const std::string path = "stages[" + std::to_string(t) + "]";
    if (read_int(r, "stage", path) != static_cast<int>(t + 1)) {
      throw FormatError(path, "stages must be numbered 1, 2, ...");
    }
    Stage st;
    st.launch = read_point(r, "launch", path + ".launch");
    st.retrieve = read_point(r, "retrieve", path + ".retrieve");
    st.transit = read_scalar(r, "transit", path + ".transit");
    st.operation = read_scalar(r, "operation", path + ".operation");
    r.expect("end", path + ".end", 0);
    s.stages.push_back(st);
  }
  s.final_transit = read_scalar(r, "final_transit", "final_transit");
  const auto n_ops = read_count(r, "operations", "operations");
  for (std::size_t k = 0; k < n_ops; ++k) {
    const std::string path = "operations[" + std::to_string(k) + "]";
    r.expect("operation", path, 0);
    Operation op;
    op.graph = read_int(r, "graph", path + ".graph");
    op.drone = read_int(r, "drone", path + ".drone");
    op.launch_stage = read_int(r, "launch_stage", path + ".launch_stage");
    op.retrieve_stage = read_int(r, "retrieve_stage", path + ".retrieve_stage");
    const auto n_visits = read_count(r, "visits", path + ".visits");
    for (std::size_t j = 0; j < n_visits; ++j) {
      const std::string vpath = path + ".visits[" + std::to_string(j) + "]";
      const auto v = r.expect("visit", vpath, 4);
      EdgeVisit ev;
      ev.edge = static_cast<int>(text::parse_int(v[0], vpath + ".edge"));
      ev.rho = text::parse_double(v[1], vpath + ".rho");
      ev.lambda = text::parse_double(v[2], vpath + ".lambda");
      if (v[3] == "forward") {
        ev.forward = true;
      } else if (v[3] == "backward") {
        ev.forward = false;
      } else {
        throw FormatError(vpath + ".direction", "expected 'forward' or 'backward'");
      }
      op.visits.push_back(ev);
    }
    r.expect("end", path + ".end", 0);
    s.operations.push_back(std::move(op));
  }
  if (!r.done()) {
    throw FormatError("<document>", "trailing content at line " + std::to_string(r.line_number()));
  }
  return s;
}

}  // namespace ammdrpg
