#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "trace.hpp"

namespace rnode::roi {

struct RoiConfig {
  int averaging_window = 30;  // K
  int raster_cell_px = 4;
  int calibration_frames = 300;
  double speed_distance_m = 100.0;  // d
  double speed_anchor_lo = 0.25;    // fractions of lane extent along the lane axis
  double speed_anchor_hi = 0.75;
  int resample_points = 64;  // M boundary points used by temporal averaging
};

struct DividerZones {
  geom::Polygon a;
  geom::Polygon b;
  geom::Polygon c;
};

struct SpeedLines {
  geom::Segment start;
  geom::Segment stop;
  double distance_m = 0.0;
};

struct ZoneSet {
  std::optional<geom::Polygon> zebra;
  std::optional<geom::Segment> stop_line;
  std::vector<geom::Polygon> lane_regions;
  geom::Point lane_vector{0.0, 1.0};  // unit
  std::optional<DividerZones> divider_zones;
  std::optional<SpeedLines> speed_lines;
  std::map<std::string, geom::RasterMask> masks;
};

// Arc-length resampling to M points anchored at the lowest-then-leftmost vertex,
// then a per-index mean across the window.
geom::Polygon temporal_average(const std::vector<geom::Polygon>& hulls, int resample_points = 64);

// Derives the full zone set from the static detections of a calibration window.
// Vehicle detections in the window fix the sign of the lane vector.
ZoneSet derive_zones(const std::vector<trace::DetectionFrame>& calibration,
                     const RoiConfig& cfg, int frame_w, int frame_h);

std::string zoneset_to_json(const ZoneSet& z);
ZoneSet zoneset_from_json(const std::string& text, const RoiConfig& cfg, int frame_w,
                          int frame_h);

}  // namespace rnode::roi
