#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trace.hpp"

namespace rnode::trace {

// Axis-aligned rectangle in world meters.
struct RectM {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct SignalInterval {
  std::int64_t from_frame = 0;
  SignalPhase phase = SignalPhase::NONE;
};

struct VehicleScript {
  std::string label;
  std::vector<geom::Point> waypoints_m;  // polyline in world meters
  double speed_kmh = 0.0;
  std::int64_t start_frame = 0;
  std::string plate;                      // empty = no plate detections
  std::string violation;                  // empty = compliant
  std::optional<double> halt_at_m;        // pause after this arc length
  std::int64_t halt_frames = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> occlusions;  // inclusive frame spans
};

struct ScenarioSpec {
  double frame_rate = 30.0;
  int width = 1920;
  int height = 1080;
  double px_per_m = 10.0;
  std::int64_t num_frames = 0;
  std::optional<RectM> zebra;
  std::optional<RectM> lane;
  std::vector<RectM> dividers;
  std::vector<SignalInterval> signal;  // sorted by from_frame; NONE before first
  double static_jitter_px = 0.0;
  double bbox_jitter_px = 0.0;
  double plate_corruption_p = 0.1;
  double vehicle_w_m = 1.8;
  double vehicle_len_m = 4.0;
  int embedding_dim = 16;
};

ScenarioSpec spec_from_json_file(const std::string& path);
void spec_to_json_file(const ScenarioSpec& spec, const std::vector<VehicleScript>& vehicles,
                       const std::string& path);
std::vector<VehicleScript> vehicles_from_json_file(const std::string& path);

// Deterministic synthesis: same (spec, vehicles, seed) gives the same scenario.
Scenario generate_scenario(const ScenarioSpec& spec, const std::vector<VehicleScript>& vehicles,
                           std::uint64_t seed);

}  // namespace rnode::trace
