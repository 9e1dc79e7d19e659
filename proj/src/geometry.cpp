#include "ammdrpg/geometry.h"

#include <algorithm>

namespace ammdrpg {

namespace {

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

bool properly_intersect(const Segment& a, const Segment& b) {
  const double d1 = cross(a.c - a.b, b.b - a.b);
  const double d2 = cross(a.c - a.b, b.c - a.b);
  const double d3 = cross(b.c - b.b, a.b - b.b);
  const double d4 = cross(b.c - b.b, a.c - b.b);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

double segment_distance(const Segment& a, const Segment& b) {
  if (properly_intersect(a, b)) {
    return 0.0;
  }
  // Otherwise the minimum is attained at an endpoint of one of the segments.
  return std::min({point_segment_distance(a.b, b), point_segment_distance(a.c, b),
                   point_segment_distance(b.b, a), point_segment_distance(b.c, a)});
}

}  // namespace ammdrpg
