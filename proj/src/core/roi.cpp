#include "roi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace rnode::roi {

using geom::Point;
using geom::Polygon;
using nlohmann::json;

namespace {

std::vector<Point> resample_boundary(const Polygon& poly, int m) {
  const auto& v = poly.vertices;
  // Anchor: lowest-then-leftmost vertex (minimal y, then minimal x).
  size_t anchor = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i].y < v[anchor].y || (v[i].y == v[anchor].y && v[i].x < v[anchor].x)) anchor = i;
  }
  double perim = poly.perimeter();
  std::vector<Point> out;
  out.reserve(m);
  double step = perim / m;
  double target = 0.0;
  double walked = 0.0;
  size_t i = anchor;
  Point cur = v[anchor];
  for (int k = 0; k < m; ++k) {
    target = k * step;
    while (true) {
      Point nxt = v[(i + 1) % v.size()];
      double seg = geom::norm(nxt - cur);
      if (walked + seg >= target || seg == 0.0) {
        double t = seg > 0 ? (target - walked) / seg : 0.0;
        out.push_back(cur + (nxt - cur) * t);
        break;
      }
      walked += seg;
      cur = nxt;
      i = (i + 1) % v.size();
    }
  }
  return out;
}

Polygon ensure_ccw(Polygon p) {
  if (p.area() < 0) std::reverse(p.vertices.begin(), p.vertices.end());
  return p;
}

std::vector<Point> bbox_corners(const geom::BBox& b) {
  return {{b.x, b.y}, {b.x + b.w, b.y}, {b.x + b.w, b.y + b.h}, {b.x, b.y + b.h}};
}

// Per-frame hull of all detections of one class; empty when degenerate.
std::optional<Polygon> class_hull(const trace::DetectionFrame& f, trace::ObjectClass cls) {
  std::vector<Point> pts;
  for (const auto& d : f.detections)
    if (d.class_id == cls)
      for (auto p : bbox_corners(d.bbox)) pts.push_back(p);
  if (pts.size() < 3) return std::nullopt;
  try {
    return geom::convex_hull(std::move(pts));
  } catch (const DegenerateInput&) {
    return std::nullopt;
  }
}

std::optional<Polygon> averaged_class_hull(const std::vector<trace::DetectionFrame>& frames,
                                           trace::ObjectClass cls, const RoiConfig& cfg) {
  std::vector<Polygon> window;
  for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
    if (auto h = class_hull(*it, cls)) {
      window.push_back(std::move(*h));
      if (static_cast<int>(window.size()) >= cfg.averaging_window) break;
    }
  }
  if (window.empty()) return std::nullopt;
  return temporal_average(window, cfg.resample_points);
}

// Cluster divider detections of one frame by overlap of inflated boxes.
std::vector<std::vector<geom::BBox>> cluster_boxes(const std::vector<geom::BBox>& boxes) {
  const size_t n = boxes.size();
  std::vector<size_t> parent(n);
  for (size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto inflated_overlap = [](const geom::BBox& a, const geom::BBox& b) {
    double pad = 0.5 * std::max({a.w, a.h, b.w, b.h});
    return a.x - pad < b.x + b.w && b.x - pad < a.x + a.w && a.y - pad < b.y + b.h &&
           b.y - pad < a.y + a.h;
  };
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (inflated_overlap(boxes[i], boxes[j])) parent[find(i)] = find(j);
  std::map<size_t, std::vector<geom::BBox>> groups;
  for (size_t i = 0; i < n; ++i) groups[find(i)].push_back(boxes[i]);
  std::vector<std::vector<geom::BBox>> out;
  for (auto& [k, g] : groups) out.push_back(std::move(g));
  return out;
}

Polygon rect_uv(Point origin, Point u, Point w, double u0, double u1, double w0, double w1) {
  auto at = [&](double uu, double ww) {
    return Point{origin.x + u.x * uu + w.x * ww, origin.y + u.y * uu + w.y * ww};
  };
  return ensure_ccw(Polygon{{at(u0, w0), at(u1, w0), at(u1, w1), at(u0, w1)}});
}

}  // namespace

Polygon temporal_average(const std::vector<Polygon>& hulls, int resample_points) {
  if (hulls.empty()) throw InputError("temporal_average: empty window");
  std::vector<Point> acc(resample_points, Point{0, 0});
  for (const auto& h : hulls) {
    auto pts = resample_boundary(h, resample_points);
    for (int i = 0; i < resample_points; ++i) acc[i] = acc[i] + pts[i];
  }
  double inv = 1.0 / hulls.size();
  for (auto& p : acc) p = p * inv;
  Polygon out{std::move(acc)};
  if (out.area() <= 0) throw InternalError("temporal_average produced a non-CCW polygon");
  return out;
}

ZoneSet derive_zones(const std::vector<trace::DetectionFrame>& calibration,
                     const RoiConfig& cfg, int frame_w, int frame_h) {
  bool any_static = false;
  for (const auto& f : calibration)
    for (const auto& d : f.detections)
      if (d.class_id == trace::ObjectClass::ZEBRA_CROSSING ||
          d.class_id == trace::ObjectClass::LANE || d.class_id == trace::ObjectClass::DIVIDER)
        any_static = true;
  if (!any_static) throw InputError("derive_zones: no static features in calibration window");

  ZoneSet z;
  z.zebra = averaged_class_hull(calibration, trace::ObjectClass::ZEBRA_CROSSING, cfg);
  auto lane = averaged_class_hull(calibration, trace::ObjectClass::LANE, cfg);
  if (lane) z.lane_regions.push_back(*lane);

  // Lane axis: principal eigenvector of the lane-hull vertex covariance.
  Point axis{0.0, 1.0};
  if (lane) {
    const auto& v = lane->vertices;
    double mx = 0, my = 0;
    for (auto p : v) {
      mx += p.x;
      my += p.y;
    }
    mx /= v.size();
    my /= v.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (auto p : v) {
      sxx += (p.x - mx) * (p.x - mx);
      sxy += (p.x - mx) * (p.y - my);
      syy += (p.y - my) * (p.y - my);
    }
    double tr = sxx + syy, det = sxx * syy - sxy * sxy;
    double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
    if (l1 <= 0 || (l2 > 1e-12 && l1 / l2 < 1.2))
      throw InputError("derive_zones: ambiguous lane axis");
    if (std::abs(sxy) > 1e-12)
      axis = geom::normalized({l1 - syy, sxy});
    else
      axis = sxx >= syy ? Point{1.0, 0.0} : Point{0.0, 1.0};
  }

  // Fix the axis sign from the majority of calibration-traffic displacements.
  {
    double flow = 0.0;
    std::vector<Point> prev;
    for (const auto& f : calibration) {
      std::vector<Point> cur;
      for (const auto& d : f.detections)
        if (d.class_id == trace::ObjectClass::VEHICLE) cur.push_back(d.bbox.bottom_center());
      for (auto c : cur) {
        double best = 1e18;
        Point bp{};
        for (auto p : prev) {
          double dd = geom::norm(c - p);
          if (dd < best) {
            best = dd;
            bp = p;
          }
        }
        if (best < 1e18 && best < 50.0) flow += geom::dot(c - bp, axis);
      }
      prev = std::move(cur);
    }
    if (flow < 0.0)
      axis = {-axis.x, -axis.y};
    else if (flow == 0.0 && (axis.y < 0 || (axis.y == 0 && axis.x < 0)))
      axis = {-axis.x, -axis.y};  // canonical sign when no traffic observed
  }
  z.lane_vector = axis;
  Point perp{-axis.y, axis.x};

  // Stop line: the zebra-hull edge with minimal midpoint y, widened to the lane extent.
  if (z.zebra) {
    const auto& v = z.zebra->vertices;
    size_t best = 0;
    double best_y = 1e18, best_len = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
      Point a = v[i], b = v[(i + 1) % v.size()];
      double len = geom::norm(b - a);
      if (len < 1e-9) continue;
      double my = (a.y + b.y) / 2.0;
      if (my < best_y - 1e-9 || (std::abs(my - best_y) <= 1e-9 && len > best_len)) {
        best_y = my;
        best = i;
        best_len = len;
      }
    }
    Point a = v[best], b = v[(best + 1) % v.size()];
    Point dir = geom::normalized(b - a);
    double lo = 0.0, hi = geom::norm(b - a);
    if (lane) {
      lo = 1e18;
      hi = -1e18;
      for (auto p : lane->vertices) {
        double t = geom::dot(p - a, dir);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    }
    z.stop_line = geom::Segment{a + dir * lo, a + dir * hi};
  }

  // Divider zones around the widest gap between consecutive divider hulls.
  {
    // Per-frame clusters, averaged per ordinal position along the axis.
    std::map<int, std::vector<Polygon>> by_slot;
    int frames_used = 0;
    for (auto it = calibration.rbegin();
         it != calibration.rend() && frames_used < cfg.averaging_window; ++it) {
      std::vector<geom::BBox> boxes;
      for (const auto& d : it->detections)
        if (d.class_id == trace::ObjectClass::DIVIDER) boxes.push_back(d.bbox);
      if (boxes.empty()) continue;
      ++frames_used;
      auto clusters = cluster_boxes(boxes);
      std::vector<std::pair<double, Polygon>> hulls;
      for (auto& cl : clusters) {
        std::vector<Point> pts;
        for (auto& b : cl)
          for (auto p : bbox_corners(b)) pts.push_back(p);
        try {
          Polygon h = geom::convex_hull(std::move(pts));
          hulls.emplace_back(geom::dot(h.centroid(), axis), std::move(h));
        } catch (const DegenerateInput&) {
        }
      }
      std::sort(hulls.begin(), hulls.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (size_t s = 0; s < hulls.size(); ++s) by_slot[static_cast<int>(s)].push_back(hulls[s].second);
    }
    std::vector<Polygon> dividers;
    for (auto& [slot, hs] : by_slot) dividers.push_back(temporal_average(hs, cfg.resample_points));

    if (dividers.size() >= 2 && lane) {
      // Work in (u,w) coordinates: u along the lane axis, w perpendicular.
      struct Interval {
        double u0, u1, w0, w1;
      };
      std::vector<Interval> iv;
      for (const auto& d : dividers) {
        Interval I{1e18, -1e18, 1e18, -1e18};
        for (auto p : d.vertices) {
          double uu = geom::dot(p, axis), ww = geom::dot(p, perp);
          I.u0 = std::min(I.u0, uu);
          I.u1 = std::max(I.u1, uu);
          I.w0 = std::min(I.w0, ww);
          I.w1 = std::max(I.w1, ww);
        }
        iv.push_back(I);
      }
      std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) {
        return a.u0 < b.u0;
      });
      size_t gi = 0;
      double gap = -1e18;
      for (size_t i = 0; i + 1 < iv.size(); ++i) {
        double g = iv[i + 1].u0 - iv[i].u1;
        if (g > gap) {
          gap = g;
          gi = i;
        }
      }
      if (gap > 0) {
        double gu0 = iv[gi].u1, gu1 = iv[gi + 1].u0;
        double dw0 = std::min(iv[gi].w0, iv[gi + 1].w0);
        double dw1 = std::max(iv[gi].w1, iv[gi + 1].w1);
        double lw0 = 1e18, lw1 = -1e18;
        for (auto p : lane->vertices) {
          double ww = geom::dot(p, perp);
          lw0 = std::min(lw0, ww);
          lw1 = std::max(lw1, ww);
        }
        double lane_width = lw1 - lw0;
        DividerZones dz;
        dz.b = rect_uv({0, 0}, axis, perp, gu0, gu1, dw0, dw1);
        dz.a = rect_uv({0, 0}, axis, perp, gu0, gu1, dw1, dw1 + lane_width);
        dz.c = rect_uv({0, 0}, axis, perp, gu0, gu1, dw0 - lane_width, dw0);
        z.divider_zones = dz;
      }
    }
  }

  // Speed lines: perpendicular segments at the configured anchor fractions.
  if (lane) {
    double u0 = 1e18, u1 = -1e18, w0 = 1e18, w1 = -1e18;
    for (auto p : lane->vertices) {
      double uu = geom::dot(p, axis), ww = geom::dot(p, perp);
      u0 = std::min(u0, uu);
      u1 = std::max(u1, uu);
      w0 = std::min(w0, ww);
      w1 = std::max(w1, ww);
    }
    auto line_at = [&](double frac) {
      double uu = u0 + frac * (u1 - u0);
      Point a{axis.x * uu + perp.x * w0, axis.y * uu + perp.y * w0};
      Point b{axis.x * uu + perp.x * w1, axis.y * uu + perp.y * w1};
      return geom::Segment{a, b};
    };
    z.speed_lines = SpeedLines{line_at(cfg.speed_anchor_lo), line_at(cfg.speed_anchor_hi),
                               cfg.speed_distance_m};
  }

  auto add_mask = [&](const std::string& name, const Polygon& p) {
    z.masks[name] = geom::rasterize(p, frame_w, frame_h, cfg.raster_cell_px);
  };
  if (z.zebra) add_mask("zebra", *z.zebra);
  for (size_t i = 0; i < z.lane_regions.size(); ++i)
    add_mask("lane" + std::to_string(i), z.lane_regions[i]);
  if (z.divider_zones) {
    add_mask("uturn_a", z.divider_zones->a);
    add_mask("uturn_b", z.divider_zones->b);
    add_mask("uturn_c", z.divider_zones->c);
  }
  return z;
}

namespace {

json poly_json(const Polygon& p) {
  json j = json::array();
  for (auto v : p.vertices) j.push_back({v.x, v.y});
  return j;
}

Polygon poly_from(const json& j) {
  Polygon p;
  for (const auto& v : j) p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
  return p;
}

json seg_json(const geom::Segment& s) {
  return json::array({{s.a.x, s.a.y}, {s.b.x, s.b.y}});
}

geom::Segment seg_from(const json& j) {
  return {{j[0][0].get<double>(), j[0][1].get<double>()},
          {j[1][0].get<double>(), j[1][1].get<double>()}};
}

}  // namespace

std::string zoneset_to_json(const ZoneSet& z) {
  json j;
  if (z.zebra) j["zebra"] = poly_json(*z.zebra);
  if (z.stop_line) j["stop_line"] = seg_json(*z.stop_line);
  j["lane_regions"] = json::array();
  for (const auto& p : z.lane_regions) j["lane_regions"].push_back(poly_json(p));
  j["lane_vector"] = {z.lane_vector.x, z.lane_vector.y};
  if (z.divider_zones) {
    j["divider_zones"] = {{"a", poly_json(z.divider_zones->a)},
                          {"b", poly_json(z.divider_zones->b)},
                          {"c", poly_json(z.divider_zones->c)}};
  }
  if (z.speed_lines) {
    j["speed_lines"] = {{"start", seg_json(z.speed_lines->start)},
                        {"stop", seg_json(z.speed_lines->stop)},
                        {"distance_m", z.speed_lines->distance_m}};
  }
  return j.dump(2);
}

ZoneSet zoneset_from_json(const std::string& text, const RoiConfig& cfg, int frame_w,
                          int frame_h) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad zone document: ") + e.what());
  }
  ZoneSet z;
  if (j.contains("zebra")) z.zebra = poly_from(j["zebra"]);
  if (j.contains("stop_line")) z.stop_line = seg_from(j["stop_line"]);
  for (const auto& p : j.value("lane_regions", json::array())) z.lane_regions.push_back(poly_from(p));
  if (j.contains("lane_vector"))
    z.lane_vector = geom::normalized({j["lane_vector"][0].get<double>(),
                                      j["lane_vector"][1].get<double>()});
  if (j.contains("divider_zones")) {
    DividerZones dz;
    dz.a = poly_from(j["divider_zones"]["a"]);
    dz.b = poly_from(j["divider_zones"]["b"]);
    dz.c = poly_from(j["divider_zones"]["c"]);
    z.divider_zones = dz;
  }
  if (j.contains("speed_lines")) {
    SpeedLines sl;
    sl.start = seg_from(j["speed_lines"]["start"]);
    sl.stop = seg_from(j["speed_lines"]["stop"]);
    sl.distance_m = j["speed_lines"]["distance_m"].get<double>();
    z.speed_lines = sl;
  }
  auto add_mask = [&](const std::string& name, const Polygon& p) {
    z.masks[name] = geom::rasterize(p, frame_w, frame_h, cfg.raster_cell_px);
  };
  if (z.zebra) add_mask("zebra", *z.zebra);
  for (size_t i = 0; i < z.lane_regions.size(); ++i)
    add_mask("lane" + std::to_string(i), z.lane_regions[i]);
  if (z.divider_zones) {
    add_mask("uturn_a", z.divider_zones->a);
    add_mask("uturn_b", z.divider_zones->b);
    add_mask("uturn_c", z.divider_zones->c);
  }
  return z;
}

}  // namespace rnode::roi
