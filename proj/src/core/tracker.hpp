#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "kalman.hpp"
#include "trace.hpp"

namespace rnode::track {

enum class TrackStatus { TENTATIVE, CONFIRMED, DELETED };

struct TrackerConfig {
  double iou_threshold = 0.45;
  double confidence_threshold = 0.50;
  int max_age = 30;
  int n_init = 3;
  double lambda_motion = 0.5;
  double gate_appearance = 0.4;
  int embedding_capacity = 50;
};

struct HistoryEntry {
  std::int64_t frame_index = 0;
  geom::BBox bbox;
  geom::Point bottom_center;
  bool observed = false;  // false while coasting on prediction
};

struct Track {
  std::int64_t track_id = 0;
  Vec8 mean = Vec8::Zero();
  Mat8 covariance = Mat8::Zero();
  TrackStatus status = TrackStatus::TENTATIVE;
  int hits = 0;
  int misses = 0;
  trace::ObjectClass class_id = trace::ObjectClass::VEHICLE;
  std::deque<std::vector<double>> embedding_gallery;
  std::vector<HistoryEntry> history;
  std::vector<trace::PlateReading> plate_evidence;

  geom::BBox predicted_bbox() const { return measurement_to_bbox(mean.head<4>()); }
};

struct AssociationResult {
  std::vector<std::pair<std::int64_t, int>> matches;  // (track_id, detection index)
  std::vector<std::int64_t> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b);

// Gated association cost; kInadmissible when both gates fail.
double association_cost(const Track& track, const trace::Detection& det,
                        const TrackerConfig& cfg);

AssociationResult associate(const std::vector<Track>& tracks,
                            const std::vector<trace::Detection>& detections,
                            const TrackerConfig& cfg);

// Sequential per-camera tracker. Frames must arrive in trace order.
class Tracker {
public:
  explicit Tracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

  // Runs predict/associate/update/spawn/retire for one frame and returns the
  // live (non-deleted) tracks after the step.
  const std::vector<Track>& step(const trace::DetectionFrame& frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }

  void predict_track(Track& t) const;
  void update_track(Track& t, const trace::Detection& det, std::int64_t frame_index) const;

private:
  TrackerConfig cfg_;
  BoxKalmanFilter filter_;
  std::vector<Track> tracks_;
  std::int64_t next_id_ = 1;
  std::int64_t last_frame_ = -1;
};

}  // namespace rnode::track
