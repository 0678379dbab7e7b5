#include "v2x.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "plate.hpp"

namespace rnode::v2x {

using nlohmann::json;

std::string to_string(MsgType t) {
  switch (t) {
    case MsgType::VIOL_RL: return "VIOL_RL";
    case MsgType::VIOL_SPD: return "VIOL_SPD";
    case MsgType::VIOL_WW: return "VIOL_WW";
    case MsgType::VIOL_UT: return "VIOL_UT";
    case MsgType::VIOL_ZC: return "VIOL_ZC";
  }
  return "VIOL_RL";
}

std::string to_string(Severity s) {
  switch (s) {
    case Severity::INFO: return "INFO";
    case Severity::WARN: return "WARN";
    case Severity::CRITICAL: return "CRITICAL";
  }
  return "WARN";
}

SafetyMessage to_safety_message(const viol::ViolationEvent& event, const GeoConfig& geo,
                                const std::string& salt,
                                const std::optional<std::string>& voted_plate,
                                geom::Point heading_hint) {
  SafetyMessage m;
  switch (event.violation_class) {
    case viol::ViolationClass::SIGNAL_JUMP: m.msg_type = MsgType::VIOL_RL; break;
    case viol::ViolationClass::SPEEDING: m.msg_type = MsgType::VIOL_SPD; break;
    case viol::ViolationClass::WRONG_WAY: m.msg_type = MsgType::VIOL_WW; break;
    case viol::ViolationClass::ILLEGAL_UTURN: m.msg_type = MsgType::VIOL_UT; break;
    case viol::ViolationClass::ZEBRA_BREACH: m.msg_type = MsgType::VIOL_ZC; break;
  }
  m.severity = (m.msg_type == MsgType::VIOL_RL || m.msg_type == MsgType::VIOL_WW)
                   ? Severity::CRITICAL
                   : Severity::WARN;
  m.confidence = event.confidence;
  m.t_utc = event.t_capture;

  // Flat-earth offset around the camera origin; adequate at intersection scale.
  double dx_m = event.location.x / geo.px_per_m;
  double dy_m = event.location.y / geo.px_per_m;
  constexpr double kMetersPerDegLat = 111320.0;
  m.lat = geo.lat - dy_m / kMetersPerDegLat;
  double coslat = std::cos(geo.lat * M_PI / 180.0);
  m.lon = geo.lon + dx_m / (kMetersPerDegLat * (std::abs(coslat) > 1e-9 ? coslat : 1e-9));
  m.lat = std::clamp(m.lat, -90.0, 90.0);
  m.lon = std::clamp(m.lon, -180.0, 180.0);

  double heading = std::atan2(heading_hint.x, -heading_hint.y) * 180.0 / M_PI;
  if (heading < 0) heading += 360.0;
  m.heading = heading >= 360.0 ? 0.0 : heading;
  m.speed = event.speed_kmh.value_or(0.0);
  m.track_id = event.track_id;
  if (voted_plate) m.plate_hash = plate::hash_plate(*voted_plate, salt);
  m.cam_id = geo.cam_id;
  m.roi_id = geo.cam_id + "/zones";
  m.event_id = event.event_id;
  return m;
}

std::string serialize_message(const SafetyMessage& m) {
  json j;
  j["msg_type"] = to_string(m.msg_type);
  j["severity"] = to_string(m.severity);
  j["confidence"] = m.confidence;
  j["t_utc"] = m.t_utc;
  j["lat"] = m.lat;
  j["lon"] = m.lon;
  j["heading"] = m.heading;
  j["speed"] = m.speed;
  j["track_id"] = m.track_id;
  if (m.plate_hash) j["plate_hash"] = *m.plate_hash;
  j["cam_id"] = m.cam_id;
  j["roi_id"] = m.roi_id;
  if (m.evidence_uri) j["evidence_uri"] = *m.evidence_uri;
  return j.dump();
}

std::string topic_for(const SafetyMessage& m) {
  return "its/violations/" + m.cam_id + "/" + to_string(m.msg_type);
}

GateDecision Gate::admit(const SafetyMessage& msg, std::int64_t now_us) {
  std::string key = to_string(msg.msg_type) + "|";
  if (cfg_.dedup_by_plate_hash)
    key += msg.plate_hash.value_or("");
  else
    key += std::to_string(msg.track_id);

  const auto window_us = static_cast<std::int64_t>(cfg_.dedup_window_s * 1e6);
  if (auto it = last_forward_.find(key); it != last_forward_.end()) {
    if (now_us - it->second < window_us) return GateDecision::DROP_DUP;
  }
  while (!window_.empty() && window_.front() <= now_us - 1000000) window_.pop_front();
  if (static_cast<double>(window_.size()) >= cfg_.max_rate_hz) return GateDecision::DROP_RATE;

  last_forward_[key] = now_us;
  window_.push_back(now_us);
  return GateDecision::FORWARD;
}

namespace {

HopStats hop_stats(std::vector<double> deltas) {
  std::sort(deltas.begin(), deltas.end());
  const size_t n = deltas.size();
  HopStats s;
  s.median_ms = deltas[(n - 1) / 2];  // lower median
  size_t p95_idx = static_cast<size_t>(std::ceil(0.95 * n)) - 1;
  s.p95_ms = deltas[p95_idx];
  return s;
}

}  // namespace

LatencyReport latency_report(const std::vector<LatencySample>& samples) {
  if (samples.empty()) throw InputError("latency_report: no samples");
  std::vector<double> f2l, n2b, b2e, e2e;
  for (const auto& s : samples) {
    if (!(s.t_frame <= s.t_log && s.t_log <= s.t_publish && s.t_publish <= s.t_broker &&
          s.t_broker <= s.t_endpoint))
      throw InputError("latency sample timestamps not ordered");
    f2l.push_back((s.t_log - s.t_frame) / 1000.0);
    n2b.push_back((s.t_broker - s.t_publish) / 1000.0);
    b2e.push_back((s.t_endpoint - s.t_broker) / 1000.0);
    e2e.push_back((s.t_endpoint - s.t_frame) / 1000.0);
  }
  LatencyReport r;
  r.frame_to_log = hop_stats(std::move(f2l));
  r.node_to_broker = hop_stats(std::move(n2b));
  r.broker_to_endpoint = hop_stats(std::move(b2e));
  r.end_to_end = hop_stats(std::move(e2e));
  r.samples = static_cast<int>(samples.size());
  return r;
}

double DelayModel::sample(std::mt19937_64& rng, std::int64_t tick) const {
  switch (kind) {
    case Kind::FIXED: return a_ms;
    case Kind::UNIFORM: {
      std::uniform_real_distribution<double> d(a_ms, b_ms);
      return d(rng);
    }
    case Kind::TWO_POINT: return (tick % 2 == 0) ? a_ms : b_ms;
  }
  return a_ms;
}

SimTransport::SimTransport(Config cfg) : cfg_(cfg), rng_(cfg.seed) {}

Receipt SimTransport::deliver(const std::string& topic, const std::string& payload,
                              std::int64_t t_publish, std::int64_t event_id) {
  Receipt r;
  r.t_publish = t_publish;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double backoff_ms = 0.0;
  for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
    r.attempts = attempt;
    std::int64_t start =
        t_publish + static_cast<std::int64_t>(std::llround(backoff_ms * 1000.0));
    if (cfg_.drop_prob > 0.0 && u01(rng_) < cfg_.drop_prob) {
      backoff_ms = backoff_ms == 0.0 ? cfg_.backoff_base_ms : backoff_ms * 2.0;
      continue;
    }
    double d1 = cfg_.node_to_broker.sample(rng_, tick_);
    double d2 = cfg_.broker_to_endpoint.sample(rng_, tick_);
    ++tick_;
    r.t_broker = start + static_cast<std::int64_t>(std::llround(d1 * 1000.0));
    r.t_endpoint = r.t_broker + static_cast<std::int64_t>(std::llround(d2 * 1000.0));
    r.delivered = true;
    for (auto& sink : sinks_) {
      sink.received.emplace(event_id, payload);  // idempotent on event_id
      sink.receipt_times.push_back(r.t_endpoint);
    }
    return r;
  }
  dead_letters_.push_back({topic, payload, "max retries exhausted"});
  r.delivered = false;
  return r;
}

}  // namespace rnode::v2x
