#pragma once

#include <cmath>
#include <stdexcept>

namespace ammdrpg {

// Planar point; all modules work in R^2 with the Euclidean norm.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }

inline double dist(Point p, Point q) { return norm(p - q); }

struct Segment {
  Point b;
  Point c;
};

inline double edge_length(const Segment& s) { return dist(s.b, s.c); }

// b + t (c - b) for t in [0, 1].
inline Point point_on_segment(const Segment& s, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("point_on_segment: parameter outside [0, 1]");
  }
  return s.b + t * (s.c - s.b);
}

// Same affine map without the range check; callers that extrapolate by a
// tolerance use this.
inline Point lerp(const Segment& s, double t) { return s.b + t * (s.c - s.b); }

inline double point_segment_distance(Point p, const Segment& s) {
  const Point d = s.c - s.b;
  const double len2 = dot(d, d);
  if (len2 == 0.0) {
    return dist(p, s.b);
  }
  double t = dot(p - s.b, d) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return dist(p, lerp(s, t));
}

// Minimum distance between two closed segments.
double segment_distance(const Segment& a, const Segment& b);

struct Box {
  Point lo;
  Point hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  bool contains(Point p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
};

}  // namespace ammdrpg
