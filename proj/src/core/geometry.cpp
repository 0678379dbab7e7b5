#include "geometry.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace rnode::geom {

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a) { return std::sqrt(dot(a, a)); }

Point normalized(Point a) {
  double n = norm(a);
  if (n == 0.0) throw DegenerateInput("cannot normalize zero vector");
  return {a.x / n, a.y / n};
}

double Polygon::area() const {
  double s = 0.0;
  const size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    s += cross(vertices[i], vertices[(i + 1) % n]);
  }
  return s / 2.0;
}

Point Polygon::centroid() const {
  double a = area();
  double cx = 0.0, cy = 0.0;
  const size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& p = vertices[i];
    const Point& q = vertices[(i + 1) % n];
    double w = cross(p, q);
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

double Polygon::perimeter() const {
  double s = 0.0;
  const size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) s += norm(vertices[(i + 1) % n] - vertices[i]);
  return s;
}

bool Polygon::contains(Point p) const {
  bool inside = false;
  const size_t n = vertices.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = vertices[i];
    const Point& b = vertices[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

double iou(const BBox& a, const BBox& b) {
  double x0 = std::max(a.x, b.x);
  double y0 = std::max(a.y, b.y);
  double x1 = std::min(a.x + a.w, b.x + b.w);
  double y1 = std::min(a.y + a.h, b.y + b.h);
  double inter = std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
  double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double orient(Point a, Point b, Point c) { return cross(b - a, c - a); }

bool segments_intersect(const Segment& s1, const Segment& s2) {
  double d1 = orient(s2.a, s2.b, s1.a);
  double d2 = orient(s2.a, s2.b, s1.b);
  double d3 = orient(s1.a, s1.b, s2.a);
  double d4 = orient(s1.a, s1.b, s2.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](Point p, Point q, Point r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
           std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
  };
  if (d1 == 0 && on_segment(s2.a, s1.a, s2.b)) return true;
  if (d2 == 0 && on_segment(s2.a, s1.b, s2.b)) return true;
  if (d3 == 0 && on_segment(s1.a, s2.a, s1.b)) return true;
  if (d4 == 0 && on_segment(s1.a, s2.b, s1.b)) return true;
  return false;
}

Polygon convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw DegenerateInput("convex hull needs >= 3 distinct points");

  const size_t n = pts.size();
  std::vector<Point> hull(2 * n);
  size_t k = 0;
  // Lower chain then upper chain; strict turns only, so collinear points drop out.
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {
    while (k >= lower && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegenerateInput("all points collinear");
  return Polygon{std::move(hull)};
}

Polygon rect_polygon(double x0, double y0, double x1, double y1) {
  if (x1 <= x0 || y1 <= y0) throw DegenerateInput("empty rectangle");
  return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

long long RasterMask::count() const {
  long long n = 0;
  for (auto c : cells) n += c;
  return n;
}

RasterMask rasterize(const Polygon& poly, int frame_w, int frame_h, int cell_px) {
  RasterMask m;
  m.cell_px = cell_px;
  m.cols = (frame_w + cell_px - 1) / cell_px;
  m.rows = (frame_h + cell_px - 1) / cell_px;
  m.cells.assign(static_cast<size_t>(m.rows) * m.cols, 0);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      Point center{(c + 0.5) * cell_px, (r + 0.5) * cell_px};
      if (poly.contains(center)) m.cells[static_cast<size_t>(r) * m.cols + c] = 1;
    }
  }
  return m;
}

}  // namespace rnode::geom
