#include "ammdrpg/render.h"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace ammdrpg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string xy(Point p) { return num(p.x) + " " + num(-p.y); }

std::string path(const std::vector<Point>& pts) {
  std::string d;
  for (std::size_t i = 0; i < pts.size(); ++i) d += (i == 0 ? "M " : " L ") + xy(pts[i]);
  return d;
}

}  // namespace

std::string render_svg(const Instance& in, const Solution& s) {
  if (s.instance_fingerprint != 0 && s.instance_fingerprint != instance_fingerprint(in)) {
    throw std::invalid_argument("solution was computed for a different instance");
  }
  for (const auto& op : s.operations) {
    const auto& g = in.graph_by_id(op.graph);
    if (op.launch_stage < 1 || op.retrieve_stage > static_cast<int>(s.stages.size())) {
      throw std::invalid_argument("operation on graph " + std::to_string(op.graph) + " refers to a missing stage");
    }
    for (const auto& v : op.visits) {
      if (v.edge < 0 || v.edge >= static_cast<int>(g.edges.size())) {
        throw std::invalid_argument("visit to an edge outside graph " + std::to_string(op.graph));
      }
    }
  }

  Box box{in.origin, in.origin};
  auto grow = [&](Point p) {
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  };
  grow(in.destination);
  for (const auto& g : in.graphs) {
    for (const auto& p : g.nodes) grow(p);
  }
  for (const auto& st : s.stages) {
    grow(st.launch);
    grow(st.retrieve);
  }
  const double pad = 0.05 * std::max({box.width(), box.height(), 1.0});
  const double w = box.width() + 2 * pad, h = box.height() + 2 * pad;
  const double stroke = 0.004 * std::max(w, h);

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + num(box.lo.x - pad) + " " + num(-box.hi.y - pad) +
         " " + num(w) + " " + num(h) + "\">\n";
  out += "<style>path,line{fill:none;stroke-width:" + num(stroke) +
         "} .edge{stroke:#bbb} .covered{stroke:#1a7f37;stroke-width:" + num(2 * stroke) +
         "} .mothership{stroke:#1f4e9c} .drone{stroke:#c2410c;stroke-dasharray:" + num(3 * stroke) +
         "}</style>\n";
  for (const auto& g : in.graphs) {
    out += "<g class=\"graph\" id=\"graph-" + std::to_string(g.id) + "\">\n";
    for (const auto& e : g.edges) {
      out += "<line class=\"edge\" x1=\"" + num(e.segment.b.x) + "\" y1=\"" + num(-e.segment.b.y) + "\" x2=\"" +
             num(e.segment.c.x) + "\" y2=\"" + num(-e.segment.c.y) + "\"/>\n";
    }
    out += "</g>\n";
  }

  std::vector<Point> ship{in.origin};
  for (const auto& st : s.stages) {
    ship.push_back(st.launch);
    ship.push_back(st.retrieve);
  }
  ship.push_back(in.destination);
  out += "<path class=\"mothership\" d=\"" + path(ship) + "\"/>\n";

  for (const auto& op : s.operations) {
    const auto& g = in.graph_by_id(op.graph);
    std::vector<Point> legs{s.stages[static_cast<std::size_t>(op.launch_stage - 1)].launch};
    for (const auto& v : op.visits) {
      const auto& seg = g.edges[static_cast<std::size_t>(v.edge)].segment;
      const Point a = lerp(seg, v.rho), b = lerp(seg, v.lambda);
      legs.push_back(a);
      legs.push_back(b);
      out += "<path class=\"covered\" data-graph=\"" + std::to_string(op.graph) + "\" data-edge=\"" +
             std::to_string(v.edge) + "\" d=\"" + path({a, b}) + "\"/>\n";
    }
    legs.push_back(s.stages[static_cast<std::size_t>(op.retrieve_stage - 1)].retrieve);
    out += "<path class=\"drone\" data-graph=\"" + std::to_string(op.graph) + "\" data-drone=\"" +
           std::to_string(op.drone) + "\" d=\"" + path(legs) + "\"/>\n";
  }
  for (std::size_t t = 0; t < s.stages.size(); ++t) {
    const auto& st = s.stages[t];
    for (auto [p, label] : {std::pair{st.launch, "L"}, std::pair{st.retrieve, "R"}}) {
      out += "<text x=\"" + num(p.x) + "\" y=\"" + num(-p.y) + "\" font-size=\"" + num(6 * stroke) + "\">" + label +
             std::to_string(t + 1) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ammdrpg
