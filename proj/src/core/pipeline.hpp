#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plate.hpp"
#include "roi.hpp"
#include "scenario_gen.hpp"
#include "tracker.hpp"
#include "v2x.hpp"
#include "violations.hpp"

namespace rnode::pipe {

struct PipelineConfig {
  track::TrackerConfig tracker;
  roi::RoiConfig roi;
  viol::ViolationConfig violations;
  v2x::GateConfig gate;
  v2x::GeoConfig camera;
  plate::VoteConfig vote;
  plate::PlateGrammar grammar;
  std::string salt = "rnode-default-salt-0001";  // RNODE_SALT env overrides
  v2x::DelayModel log_delay = v2x::DelayModel::two_point(35.0, 48.0);
  v2x::SimTransport::Config transport{v2x::DelayModel::two_point(12.0, 22.0),
                                      v2x::DelayModel::two_point(8.0, 15.0),
                                      0.0, 3, 50.0, 1};
  bool v2x_enabled = true;
  bool pipelined = false;
  bool realtime = false;
};

PipelineConfig config_from_json_file(const std::string& path);
PipelineConfig apply_env_overrides(PipelineConfig cfg);

struct RunReport {
  viol::EvalReport eval;
  bool has_ground_truth = false;
  int frames_processed = 0;
  int events_total = 0;
  int messages_forwarded = 0;
  int drops_dup = 0;
  int drops_rate = 0;
  int dead_letters = 0;
  int plate_ballots = 0;
  int plate_decided = 0;
  double plate_decision_rate = 0.0;
  double throughput_fps = 0.0;
  std::optional<v2x::LatencyReport> latency;

  std::string to_json() const;
};

struct RunOutput {
  RunReport report;
  std::vector<viol::ViolationEvent> events;
  std::vector<viol::SpeedMeasurement> measurements;
  std::vector<std::string> message_log;  // serialized wire payloads, forward order
  std::vector<v2x::LatencySample> latency_samples;
  std::vector<v2x::DeadLetter> dead_letters;
};

// Full trace -> tracker -> zones -> violations -> plate -> v2x run.
// Deterministic for a fixed (scenario, config, seed).
RunOutput run(const trace::Scenario& scenario, const PipelineConfig& config,
              std::uint64_t seed, const std::optional<roi::ZoneSet>& pinned_zones = {});

// Convenience wrapper: reads the trace, runs, writes events.jsonl,
// messages.jsonl, dead_letters.jsonl and report.json under out_dir.
RunReport run_to_files(const std::string& trace_path, const PipelineConfig& config,
                       std::uint64_t seed, const std::string& out_dir,
                       const std::optional<std::string>& zones_path = {});

struct StageTiming {
  double read_us_per_frame = 0.0;
  double tracker_us_per_frame = 0.0;
  double zones_us_total = 0.0;
  double violations_us_per_frame = 0.0;
  double v2x_us_per_frame = 0.0;
};

struct BenchReport {
  double fps_mean = 0.0;
  double fps_std = 0.0;
  StageTiming stages;  // averaged over repetitions
  int repetitions = 0;

  std::string to_json() const;
};

BenchReport bench(const std::string& trace_path, const PipelineConfig& config,
                  int repetitions);

}  // namespace rnode::pipe
