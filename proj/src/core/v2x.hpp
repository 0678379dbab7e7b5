#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "violations.hpp"

namespace rnode::v2x {

enum class MsgType { VIOL_RL, VIOL_SPD, VIOL_WW, VIOL_UT, VIOL_ZC };
enum class Severity { INFO, WARN, CRITICAL };

std::string to_string(MsgType t);
std::string to_string(Severity s);

struct SafetyMessage {
  MsgType msg_type = MsgType::VIOL_RL;
  Severity severity = Severity::WARN;
  double confidence = 0.0;
  std::int64_t t_utc = 0;  // us
  double lat = 0.0;
  double lon = 0.0;
  double heading = 0.0;  // degrees [0, 360)
  double speed = 0.0;    // km/h
  std::int64_t track_id = 0;
  std::optional<std::string> plate_hash;  // 64 lowercase hex
  std::string cam_id;
  std::string roi_id;
  std::optional<std::string> evidence_uri;
  std::int64_t event_id = 0;  // endpoint idempotency key; not part of the wire payload
};

struct GeoConfig {
  std::string cam_id = "cam0";
  double lat = 0.0;
  double lon = 0.0;
  double px_per_m = 10.0;
};

// Event -> wire message. The voted plate, when present, is hashed; raw text
// never reaches the message.
SafetyMessage to_safety_message(const viol::ViolationEvent& event, const GeoConfig& geo,
                                const std::string& salt,
                                const std::optional<std::string>& voted_plate,
                                geom::Point heading_hint = {0.0, 1.0});

// UTF-8 JSON with exactly the snake_case wire fields; absent optionals omitted.
std::string serialize_message(const SafetyMessage& msg);
std::string topic_for(const SafetyMessage& msg);

enum class GateDecision { FORWARD, DROP_DUP, DROP_RATE };

struct GateConfig {
  double max_rate_hz = 10.0;
  double dedup_window_s = 4.0;
  bool dedup_by_plate_hash = false;  // default key is (msg_type, track_id)
};

class Gate {
public:
  explicit Gate(GateConfig cfg = {}) : cfg_(cfg) {}
  GateDecision admit(const SafetyMessage& msg, std::int64_t now_us);
  const GateConfig& config() const { return cfg_; }

private:
  GateConfig cfg_;
  std::map<std::string, std::int64_t> last_forward_;
  std::deque<std::int64_t> window_;
};

struct LatencySample {
  std::int64_t event_id = 0;
  std::int64_t t_frame = 0;
  std::int64_t t_log = 0;
  std::int64_t t_publish = 0;
  std::int64_t t_broker = 0;
  std::int64_t t_endpoint = 0;
};

struct HopStats {
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct LatencyReport {
  HopStats frame_to_log;
  HopStats node_to_broker;
  HopStats broker_to_endpoint;
  HopStats end_to_end;
  int samples = 0;
};

// Lower median; p95 at index ceil(0.95*n) - 1 of the sorted deltas.
LatencyReport latency_report(const std::vector<LatencySample>& samples);

// Per-hop delay generators for the simulated transport.
struct DelayModel {
  enum class Kind { FIXED, UNIFORM, TWO_POINT } kind = Kind::FIXED;
  double a_ms = 0.0;
  double b_ms = 0.0;

  static DelayModel fixed(double ms) { return {Kind::FIXED, ms, ms}; }
  static DelayModel uniform(double lo, double hi) { return {Kind::UNIFORM, lo, hi}; }
  // Alternates a,b deterministically; handy for pinning median/p95 pairs.
  static DelayModel two_point(double a, double b) { return {Kind::TWO_POINT, a, b}; }

  double sample(std::mt19937_64& rng, std::int64_t tick) const;
};

struct Receipt {
  std::int64_t t_publish = 0;
  std::int64_t t_broker = 0;
  std::int64_t t_endpoint = 0;
  bool delivered = false;
  int attempts = 0;
};

class Transport {
public:
  virtual ~Transport() = default;
  virtual Receipt deliver(const std::string& topic, const std::string& payload,
                          std::int64_t t_publish, std::int64_t event_id) = 0;
};

struct EndpointSink {
  std::string name;
  std::map<std::int64_t, std::string> received;  // event_id -> payload (idempotent)
  std::vector<std::int64_t> receipt_times;
};

struct DeadLetter {
  std::string topic;
  std::string payload;
  std::string reason;
};

// In-process broker + RSU/OBU sinks with seeded delay and drop models.
class SimTransport : public Transport {
public:
  struct Config {
    DelayModel node_to_broker = DelayModel::fixed(12.0);
    DelayModel broker_to_endpoint = DelayModel::fixed(8.0);
    double drop_prob = 0.0;
    int max_attempts = 3;
    double backoff_base_ms = 50.0;
    std::uint64_t seed = 1;
  };

  explicit SimTransport(Config cfg);
  Receipt deliver(const std::string& topic, const std::string& payload,
                  std::int64_t t_publish, std::int64_t event_id) override;

  void subscribe(const std::string& name) { sinks_.push_back({name, {}, {}}); }
  const std::vector<EndpointSink>& sinks() const { return sinks_; }
  const std::vector<DeadLetter>& dead_letters() const { return dead_letters_; }

private:
  Config cfg_;
  std::mt19937_64 rng_;
  std::int64_t tick_ = 0;
  std::vector<EndpointSink> sinks_;
  std::vector<DeadLetter> dead_letters_;
};

}  // namespace rnode::v2x
