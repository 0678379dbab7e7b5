#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace rnode::geom {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }

double dot(Point a, Point b);
double cross(Point a, Point b);
double norm(Point a);
Point normalized(Point a);

// Directed segment from a to b.
struct Segment {
  Point a;
  Point b;
};

// Simple CCW polygon (signed area > 0).
struct Polygon {
  std::vector<Point> vertices;

  double area() const;           // shoelace, signed
  Point centroid() const;
  bool contains(Point p) const;  // even-odd rule
  double perimeter() const;
};

struct BBox {
  double x = 0, y = 0, w = 0, h = 0;

  Point bottom_center() const { return {x + w / 2.0, y + h}; }
  Point center() const { return {x + w / 2.0, y + h / 2.0}; }

  bool operator==(const BBox&) const = default;
};

double iou(const BBox& a, const BBox& b);

// Orientation of the triple (a,b,c): >0 counter-clockwise, <0 clockwise, 0 collinear.
double orient(Point a, Point b, Point c);

// Proper intersection test between two closed segments (shared endpoints count).
bool segments_intersect(const Segment& s1, const Segment& s2);

// Minimal convex polygon over the points, CCW, collinear boundary points dropped.
// Throws DegenerateInput for < 3 points or an all-collinear set.
Polygon convex_hull(std::vector<Point> points);

// Axis-aligned rectangle as a CCW polygon.
Polygon rect_polygon(double x0, double y0, double x1, double y1);

// Even-odd rasterization: cell (r,c) is set iff its center lies inside the polygon.
struct RasterMask {
  int rows = 0;
  int cols = 0;
  int cell_px = 1;
  std::vector<std::uint8_t> cells;  // row-major

  bool at(int r, int c) const { return cells[static_cast<size_t>(r) * cols + c] != 0; }
  long long count() const;
};

RasterMask rasterize(const Polygon& poly, int frame_w, int frame_h, int cell_px);

}  // namespace rnode::geom
