#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roi.hpp"
#include "tracker.hpp"

namespace rnode::viol {

enum class ViolationClass { SIGNAL_JUMP, ZEBRA_BREACH, WRONG_WAY, ILLEGAL_UTURN, SPEEDING };

std::string to_string(ViolationClass c);
ViolationClass violation_from_string(const std::string& s);

struct ViolationConfig {
  double speed_limit_kmh = 60.0;
  int wrongway_window = 10;          // W frames for the mean displacement
  double wrongway_min_motion = 1.0;  // px/frame floor
  int wrongway_persist = 15;
  double uturn_window_s = 6.0;
  double uturn_heading_deg = 135.0;
  double stop_eps_px = 1.0;  // per-frame displacement below this counts as halted
  int hold_frames = 10;
  int eval_slack_frames = 15;
};

struct ViolationEvent {
  std::int64_t event_id = 0;
  ViolationClass violation_class = ViolationClass::SIGNAL_JUMP;
  std::int64_t track_id = 0;
  std::int64_t frame_index = 0;
  std::int64_t t_capture = 0;
  std::int64_t t_mono_detect = 0;
  double confidence = 1.0;
  std::optional<double> speed_kmh;
  geom::Point location;
  std::optional<std::string> plate_best;
};

struct SpeedMeasurement {
  std::int64_t track_id = 0;
  std::int64_t frame_index = 0;
  std::int64_t frame_count = 0;  // N between the two crossings
  double speed_kmh = 0.0;
};

// Crossing test over the last two observed track positions.
struct Crossing {
  std::int64_t frame_index = 0;
  double direction = 0.0;  // dot(displacement, lane vector); sign = side transition
};
std::optional<Crossing> crossed_line(const track::Track& track, const geom::Segment& line,
                                     geom::Point lane_vector);

// Stateful per-camera rule engine; feed every frame in order after the tracker step.
class ViolationEngine {
public:
  ViolationEngine(roi::ZoneSet zones, ViolationConfig cfg, double frame_rate)
      : zones_(std::move(zones)), cfg_(cfg), frame_interval_(1.0 / frame_rate) {}

  std::vector<ViolationEvent> process(const std::vector<track::Track>& tracks,
                                      const trace::DetectionFrame& frame);

  const std::vector<SpeedMeasurement>& measurements() const { return measurements_; }
  const roi::ZoneSet& zones() const { return zones_; }

private:
  struct TrackState {
    bool fired[5] = {false, false, false, false, false};
    geom::Point last_observed{};
    std::int64_t last_observed_frame = -1;
    bool has_observed = false;
    std::vector<std::pair<std::int64_t, geom::Point>> window;  // recent observed points
    int wrongway_streak = 0;
    int halt_streak = 0;
    int current_zone = -1;  // 0=A 1=B 2=C
    std::vector<std::tuple<int, std::int64_t, geom::Point>> zone_entries;
    std::optional<std::int64_t> speed_start_frame;
  };

  ViolationEvent make_event(ViolationClass cls, const track::Track& t,
                            const trace::DetectionFrame& f, geom::Point loc, double conf);

  roi::ZoneSet zones_;
  ViolationConfig cfg_;
  double frame_interval_;
  std::int64_t next_event_id_ = 1;
  std::map<std::int64_t, TrackState> state_;
  std::vector<SpeedMeasurement> measurements_;
};

// Event log round-trip (JSON Lines, exact wire field names).
std::string event_to_json_line(const ViolationEvent& e);
ViolationEvent event_from_json_line(const std::string& line);

struct ClassMetrics {
  int tp = 0, fp = 0, fn = 0;
  double precision = 1.0, recall = 1.0, fp_rate = 0.0;
};

struct EvalReport {
  std::map<std::string, ClassMetrics> per_class;
  ClassMetrics overall;
  std::optional<double> speed_mae_kmh;
  int speed_samples = 0;
};

EvalReport evaluate(const std::vector<ViolationEvent>& events,
                    const std::vector<SpeedMeasurement>& measurements,
                    const std::vector<trace::GroundTruthRecord>& ground_truth,
                    int slack_frames = 15);

}  // namespace rnode::viol
