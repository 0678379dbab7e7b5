#include "tracker.hpp"

#include <algorithm>
#include <cmath>

#include "assignment.hpp"
#include "errors.hpp"

namespace rnode::track {

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) return 1.0;
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  return 1.0 - d;  // inputs are unit vectors
}

double association_cost(const Track& track, const trace::Detection& det,
                        const TrackerConfig& cfg) {
  double iou = geom::iou(track.predicted_bbox(), det.bbox);
  if (det.embedding.empty() || track.embedding_gallery.empty()) {
    // IoU-only path when appearance is unavailable.
    if (iou < cfg.iou_threshold) return kInadmissible;
    return 1.0 - iou;
  }
  double app = 2.0;
  for (const auto& e : track.embedding_gallery)
    app = std::min(app, cosine_distance(e, det.embedding));
  if (iou < cfg.iou_threshold && app > cfg.gate_appearance) return kInadmissible;
  return cfg.lambda_motion * (1.0 - iou) + (1.0 - cfg.lambda_motion) * app;
}

AssociationResult associate(const std::vector<Track>& tracks,
                            const std::vector<trace::Detection>& detections,
                            const TrackerConfig& cfg) {
  AssociationResult res;
  const int rows = static_cast<int>(tracks.size());
  const int cols = static_cast<int>(detections.size());
  std::vector<double> cost(static_cast<size_t>(rows) * cols, kInadmissible);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (tracks[i].class_id != detections[j].class_id) continue;
      cost[static_cast<size_t>(i) * cols + j] = association_cost(tracks[i], detections[j], cfg);
    }
  std::vector<int> match = solve_assignment(cost, rows, cols);
  std::vector<char> det_taken(cols, 0);
  for (int i = 0; i < rows; ++i) {
    if (match[i] >= 0) {
      res.matches.emplace_back(tracks[i].track_id, match[i]);
      det_taken[match[i]] = 1;
    } else {
      res.unmatched_tracks.push_back(tracks[i].track_id);
    }
  }
  for (int j = 0; j < cols; ++j)
    if (!det_taken[j]) res.unmatched_detections.push_back(j);
  return res;
}

void Tracker::predict_track(Track& t) const {
  filter_.predict(t.mean, t.covariance);
}

void Tracker::update_track(Track& t, const trace::Detection& det,
                           std::int64_t frame_index) const {
  if (det.class_id != t.class_id) throw InternalError("class mismatch in track update");
  filter_.update(t.mean, t.covariance, bbox_to_measurement(det.bbox));
  t.hits += 1;
  t.misses = 0;
  if (!det.embedding.empty()) {
    t.embedding_gallery.push_back(det.embedding);
    while (static_cast<int>(t.embedding_gallery.size()) > cfg_.embedding_capacity)
      t.embedding_gallery.pop_front();
  }
  if (t.status == TrackStatus::TENTATIVE && t.hits >= cfg_.n_init)
    t.status = TrackStatus::CONFIRMED;
  // Observed history keeps the raw measurement; geometric predicates read it.
  t.history.push_back({frame_index, det.bbox, det.bbox.bottom_center(), true});
}

const std::vector<Track>& Tracker::step(const trace::DetectionFrame& frame) {
  if (frame.frame_index <= last_frame_)
    throw InputError("out-of-order frame " + std::to_string(frame.frame_index));
  last_frame_ = frame.frame_index;

  for (auto& t : tracks_) predict_track(t);

  // Only confident vehicle-like detections take part in tracking.
  std::vector<int> det_map;
  std::vector<trace::Detection> dets;
  for (size_t i = 0; i < frame.detections.size(); ++i) {
    const auto& d = frame.detections[i];
    if (d.class_id != trace::ObjectClass::VEHICLE &&
        d.class_id != trace::ObjectClass::TWO_WHEELER)
      continue;
    if (d.confidence < cfg_.confidence_threshold) continue;
    det_map.push_back(static_cast<int>(i));
    dets.push_back(d);
  }

  AssociationResult assoc = associate(tracks_, dets, cfg_);

  std::vector<char> det_matched(dets.size(), 0);
  for (auto [tid, di] : assoc.matches) {
    auto it = std::find_if(tracks_.begin(), tracks_.end(),
                           [tid](const Track& t) { return t.track_id == tid; });
    update_track(*it, dets[di], frame.frame_index);
    det_matched[di] = 1;
  }
  for (auto tid : assoc.unmatched_tracks) {
    auto it = std::find_if(tracks_.begin(), tracks_.end(),
                           [tid](const Track& t) { return t.track_id == tid; });
    Track& t = *it;
    t.misses += 1;
    if (t.misses > cfg_.max_age) {
      t.status = TrackStatus::DELETED;
    } else {
      geom::BBox pb = t.predicted_bbox();
      t.history.push_back({frame.frame_index, pb, pb.bottom_center(), false});
    }
  }
  for (size_t di = 0; di < dets.size(); ++di) {
    if (det_matched[di]) continue;
    Track t;
    t.track_id = next_id_++;
    t.class_id = dets[di].class_id;
    filter_.initiate(bbox_to_measurement(dets[di].bbox), t.mean, t.covariance);
    t.hits = 1;
    t.misses = 0;
    t.status = TrackStatus::TENTATIVE;
    if (!dets[di].embedding.empty()) t.embedding_gallery.push_back(dets[di].embedding);
    t.history.push_back(
        {frame.frame_index, dets[di].bbox, dets[di].bbox.bottom_center(), true});
    tracks_.push_back(std::move(t));
  }

  std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::DELETED; });
  return tracks_;
}

}  // namespace rnode::track
