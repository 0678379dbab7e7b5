#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace rnode::trace {

enum class SignalPhase { RED, AMBER, GREEN, NONE };

enum class ObjectClass {
  VEHICLE,
  TWO_WHEELER,
  PEDESTRIAN,
  ZEBRA_CROSSING,
  LANE,
  DIVIDER,
  LICENSE_PLATE
};

std::string to_string(SignalPhase p);
std::string to_string(ObjectClass c);
SignalPhase phase_from_string(const std::string& s);
ObjectClass class_from_string(const std::string& s);

struct PlateReading {
  std::string text;  // uppercase [A-Z0-9], non-empty, length <= 12
  double confidence = 0.0;

  bool operator==(const PlateReading&) const = default;
};

struct Detection {
  ObjectClass class_id = ObjectClass::VEHICLE;
  geom::BBox bbox;
  double confidence = 0.0;
  std::vector<double> embedding;  // empty or unit-norm
  std::optional<PlateReading> plate_reading;

  bool operator==(const Detection&) const = default;
};

struct DetectionFrame {
  std::int64_t frame_index = 0;
  std::int64_t t_capture = 0;  // us since epoch, wall clock
  std::int64_t t_mono = 0;     // us, monotonic
  SignalPhase signal_phase = SignalPhase::NONE;
  std::vector<Detection> detections;

  bool operator==(const DetectionFrame&) const = default;
};

struct GroundTruthRecord {
  std::string violation_class;
  std::string vehicle_label;
  std::int64_t span_begin = 0;
  std::int64_t span_end = 0;
  std::optional<double> true_speed_kmh;

  bool operator==(const GroundTruthRecord&) const = default;
};

struct Scenario {
  std::vector<DetectionFrame> frames;
  double frame_rate = 30.0;
  int width = 1920;
  int height = 1080;
  std::vector<GroundTruthRecord> ground_truth;

  bool operator==(const Scenario&) const = default;
};

// Validates the invariants of a scenario assembled in memory; throws on violation.
void validate(const Scenario& s);

// JSON Lines trace IO. Ground truth rides in a sidecar <path>.gt.json when present.
Scenario read_trace(const std::string& path);
void write_trace(const Scenario& s, const std::string& path);

std::vector<GroundTruthRecord> read_ground_truth(const std::string& path);
void write_ground_truth(const std::vector<GroundTruthRecord>& gt, const std::string& path);

}  // namespace rnode::trace
