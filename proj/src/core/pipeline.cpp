#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <queue>
#include <thread>

#include "errors.hpp"

namespace rnode::pipe {

using nlohmann::json;

namespace {

v2x::DelayModel delay_from_json(const json& j) {
  std::string kind = j.value("kind", "fixed");
  double a = j.value("a_ms", 0.0);
  double b = j.value("b_ms", a);
  if (kind == "fixed") return v2x::DelayModel::fixed(a);
  if (kind == "uniform") return v2x::DelayModel::uniform(a, b);
  if (kind == "two_point") return v2x::DelayModel::two_point(a, b);
  throw InputError("unknown delay model kind: " + kind);
}

}  // namespace

PipelineConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(std::string("bad config: ") + e.what());
  }
  PipelineConfig c;
  if (j.contains("tracker")) {
    const auto& t = j["tracker"];
    c.tracker.iou_threshold = t.value("iou_threshold", c.tracker.iou_threshold);
    c.tracker.confidence_threshold =
        t.value("confidence_threshold", c.tracker.confidence_threshold);
    c.tracker.max_age = t.value("max_age", c.tracker.max_age);
    c.tracker.n_init = t.value("n_init", c.tracker.n_init);
    c.tracker.lambda_motion = t.value("lambda_motion", c.tracker.lambda_motion);
    c.tracker.gate_appearance = t.value("gate_appearance", c.tracker.gate_appearance);
    c.tracker.embedding_capacity = t.value("embedding_capacity", c.tracker.embedding_capacity);
  }
  if (j.contains("roi")) {
    const auto& r = j["roi"];
    c.roi.averaging_window = r.value("averaging_window", c.roi.averaging_window);
    c.roi.raster_cell_px = r.value("raster_cell_px", c.roi.raster_cell_px);
    c.roi.calibration_frames = r.value("calibration_frames", c.roi.calibration_frames);
    c.roi.speed_distance_m = r.value("speed_distance_m", c.roi.speed_distance_m);
    c.roi.speed_anchor_lo = r.value("speed_anchor_lo", c.roi.speed_anchor_lo);
    c.roi.speed_anchor_hi = r.value("speed_anchor_hi", c.roi.speed_anchor_hi);
  }
  if (j.contains("violations")) {
    const auto& v = j["violations"];
    c.violations.speed_limit_kmh = v.value("speed_limit_kmh", c.violations.speed_limit_kmh);
    c.violations.wrongway_window = v.value("wrongway_window", c.violations.wrongway_window);
    c.violations.wrongway_min_motion =
        v.value("wrongway_min_motion", c.violations.wrongway_min_motion);
    c.violations.wrongway_persist = v.value("wrongway_persist", c.violations.wrongway_persist);
    c.violations.uturn_window_s = v.value("uturn_window_s", c.violations.uturn_window_s);
    c.violations.uturn_heading_deg =
        v.value("uturn_heading_deg", c.violations.uturn_heading_deg);
    c.violations.stop_eps_px = v.value("stop_eps_px", c.violations.stop_eps_px);
    c.violations.hold_frames = v.value("hold_frames", c.violations.hold_frames);
    c.violations.eval_slack_frames =
        v.value("eval_slack_frames", c.violations.eval_slack_frames);
  }
  if (j.contains("gate")) {
    const auto& g = j["gate"];
    c.gate.max_rate_hz = g.value("max_rate_hz", c.gate.max_rate_hz);
    c.gate.dedup_window_s = g.value("dedup_window_s", c.gate.dedup_window_s);
    c.gate.dedup_by_plate_hash = g.value("dedup_by_plate_hash", c.gate.dedup_by_plate_hash);
  }
  if (j.contains("camera")) {
    const auto& cam = j["camera"];
    c.camera.cam_id = cam.value("cam_id", c.camera.cam_id);
    c.camera.lat = cam.value("lat", c.camera.lat);
    c.camera.lon = cam.value("lon", c.camera.lon);
    c.camera.px_per_m = cam.value("px_per_m", c.camera.px_per_m);
  }
  if (j.contains("vote")) {
    c.vote.t_vote = j["vote"].value("t_vote", c.vote.t_vote);
    c.vote.min_readings = j["vote"].value("min_readings", c.vote.min_readings);
  }
  if (j.contains("grammar")) c.grammar = plate::PlateGrammar::from_json(j["grammar"].dump());
  c.salt = j.value("salt", c.salt);
  if (j.contains("log_delay")) c.log_delay = delay_from_json(j["log_delay"]);
  if (j.contains("transport")) {
    const auto& t = j["transport"];
    if (t.contains("node_to_broker"))
      c.transport.node_to_broker = delay_from_json(t["node_to_broker"]);
    if (t.contains("broker_to_endpoint"))
      c.transport.broker_to_endpoint = delay_from_json(t["broker_to_endpoint"]);
    c.transport.drop_prob = t.value("drop_prob", c.transport.drop_prob);
    c.transport.max_attempts = t.value("max_attempts", c.transport.max_attempts);
    c.transport.backoff_base_ms = t.value("backoff_base_ms", c.transport.backoff_base_ms);
  }
  c.v2x_enabled = j.value("v2x_enabled", c.v2x_enabled);
  c.pipelined = j.value("pipelined", c.pipelined);
  return apply_env_overrides(std::move(c));
}

PipelineConfig apply_env_overrides(PipelineConfig cfg) {
  if (const char* salt = std::getenv("RNODE_SALT"); salt && *salt) cfg.salt = salt;
  return cfg;
}

namespace {

// Everything stage B (violations, plate, v2x, logging) needs for one frame.
struct FrameJob {
  trace::DetectionFrame frame;
  std::vector<track::Track> tracks;
  bool last = false;
};

class BoundedQueue {
public:
  explicit BoundedQueue(size_t cap) : cap_(cap) {}

  void push(FrameJob job) {
    std::unique_lock lk(m_);
    cv_full_.wait(lk, [&] { return q_.size() < cap_; });
    q_.push(std::move(job));
    cv_empty_.notify_one();
  }

  FrameJob pop() {
    std::unique_lock lk(m_);
    cv_empty_.wait(lk, [&] { return !q_.empty(); });
    FrameJob job = std::move(q_.front());
    q_.pop();
    cv_full_.notify_one();
    return job;
  }

private:
  size_t cap_;
  std::mutex m_;
  std::queue<FrameJob> q_;
  std::condition_variable cv_empty_, cv_full_;
};

// Stage B state shared by the single consumer.
struct StageB {
  const PipelineConfig* cfg = nullptr;
  const trace::Scenario* scenario = nullptr;
  std::optional<viol::ViolationEngine> engine;
  std::map<std::int64_t, plate::PlateBallot> ballots;
  v2x::Gate gate;
  std::optional<v2x::SimTransport> transport;
  std::mt19937_64 log_rng;
  std::int64_t log_tick = 0;
  RunOutput out;
  double* v2x_us_acc = nullptr;  // set by bench to split stage-B timing

  StageB(const PipelineConfig& c, const trace::Scenario& s, std::uint64_t seed)
      : cfg(&c), scenario(&s), gate(c.gate), log_rng(seed ^ 0x9e3779b97f4a7c15ULL) {
    auto tcfg = c.transport;
    tcfg.seed = seed;
    transport.emplace(tcfg);
    transport->subscribe("rsu0");
  }

  void attach_plate_readings(const FrameJob& job) {
    for (const auto& d : job.frame.detections) {
      if (d.class_id != trace::ObjectClass::LICENSE_PLATE || !d.plate_reading) continue;
      geom::Point pc = d.bbox.center();
      for (const auto& t : job.tracks) {
        if (t.status == track::TrackStatus::DELETED) continue;
        if (t.history.empty() || t.history.back().frame_index != job.frame.frame_index ||
            !t.history.back().observed)
          continue;
        const auto& b = t.history.back().bbox;
        if (pc.x >= b.x && pc.x <= b.x + b.w && pc.y >= b.y && pc.y <= b.y + b.h) {
          auto& ballot = ballots[t.track_id];
          ballot.track_id = t.track_id;
          ballot.add({d.plate_reading->text, d.plate_reading->confidence,
                      job.frame.frame_index},
                     cfg->vote.t_vote);
          break;
        }
      }
    }
  }

  void process(const FrameJob& job) {
    attach_plate_readings(job);
    if (!engine) return;  // calibration phase: no violation firing
    auto events = engine->process(job.tracks, job.frame);
    for (auto& e : events) {
      std::optional<std::string> voted;
      if (auto it = ballots.find(e.track_id); it != ballots.end()) {
        if (auto v = plate::vote(it->second, cfg->grammar, cfg->vote)) voted = v->first;
      }
      e.plate_best = voted;
      out.events.push_back(e);
      if (!cfg->v2x_enabled) continue;

      auto v0 = std::chrono::steady_clock::now();
      auto msg = v2x::to_safety_message(e, cfg->camera, cfg->salt, voted,
                                        engine->zones().lane_vector);
      std::int64_t t_log =
          e.t_capture + static_cast<std::int64_t>(
                            std::llround(cfg->log_delay.sample(log_rng, log_tick++) * 1000.0));
      auto decision = gate.admit(msg, t_log);
      if (decision == v2x::GateDecision::DROP_DUP) {
        ++out.report.drops_dup;
      } else if (decision == v2x::GateDecision::DROP_RATE) {
        ++out.report.drops_rate;
      } else {
        std::string payload = v2x::serialize_message(msg);
        auto receipt = transport->deliver(v2x::topic_for(msg), payload, t_log, e.event_id);
        if (receipt.delivered) {
          out.message_log.push_back(payload);
          ++out.report.messages_forwarded;
          out.latency_samples.push_back({e.event_id, e.t_capture, t_log, receipt.t_publish,
                                         receipt.t_broker, receipt.t_endpoint});
        }
      }
      if (v2x_us_acc) {
        auto v1 = std::chrono::steady_clock::now();
        *v2x_us_acc += std::chrono::duration<double, std::micro>(v1 - v0).count();
      }
    }
  }

  void finish() {
    out.measurements = engine ? engine->measurements() : std::vector<viol::SpeedMeasurement>{};
    out.dead_letters = transport->dead_letters();
    out.report.dead_letters = static_cast<int>(out.dead_letters.size());
    out.report.events_total = static_cast<int>(out.events.size());
    out.report.plate_ballots = static_cast<int>(ballots.size());
    for (const auto& [tid, b] : ballots)
      if (plate::vote(b, cfg->grammar, cfg->vote)) ++out.report.plate_decided;
    out.report.plate_decision_rate =
        out.report.plate_ballots > 0
            ? static_cast<double>(out.report.plate_decided) / out.report.plate_ballots
            : 0.0;
    if (!out.latency_samples.empty()) out.report.latency = v2x::latency_report(out.latency_samples);
    if (!scenario->ground_truth.empty()) {
      out.report.has_ground_truth = true;
      out.report.eval = viol::evaluate(out.events, out.measurements, scenario->ground_truth,
                                       cfg->violations.eval_slack_frames);
    }
  }
};

}  // namespace

RunOutput run(const trace::Scenario& scenario, const PipelineConfig& config,
              std::uint64_t seed, const std::optional<roi::ZoneSet>& pinned_zones) {
  auto t0 = std::chrono::steady_clock::now();
  StageB stage_b(config, scenario, seed);

  track::Tracker tracker(config.tracker);
  std::vector<trace::DetectionFrame> calibration;
  const int calib_n = pinned_zones ? 0 : config.roi.calibration_frames;
  if (pinned_zones) stage_b.engine.emplace(*pinned_zones, config.violations, scenario.frame_rate);

  auto stage_a = [&](const trace::DetectionFrame& frame, auto&& emit) {
    const auto& tracks = tracker.step(frame);
    if (!stage_b.engine) {
      calibration.push_back(frame);
      if (static_cast<int>(calibration.size()) >= calib_n) {
        auto zones = roi::derive_zones(calibration, config.roi, scenario.width, scenario.height);
        stage_b.engine.emplace(std::move(zones), config.violations, scenario.frame_rate);
        calibration.clear();
      }
    }
    emit(FrameJob{frame, tracks, false});
    if (config.realtime)
      std::this_thread::sleep_for(
          std::chrono::microseconds(static_cast<std::int64_t>(1e6 / scenario.frame_rate)));
  };

  if (!config.pipelined) {
    for (const auto& frame : scenario.frames)
      stage_a(frame, [&](FrameJob job) { stage_b.process(job); });
  } else {
    // Two-stage pipeline over a bounded FIFO; per-frame order is preserved, so
    // the output is identical to the single-threaded path.
    BoundedQueue queue(32);
    std::thread consumer([&] {
      while (true) {
        FrameJob job = queue.pop();
        if (job.last) break;
        stage_b.process(job);
      }
    });
    for (const auto& frame : scenario.frames)
      stage_a(frame, [&](FrameJob job) { queue.push(std::move(job)); });
    queue.push(FrameJob{{}, {}, true});
    consumer.join();
  }

  stage_b.finish();
  stage_b.out.report.frames_processed = static_cast<int>(scenario.frames.size());
  auto t1 = std::chrono::steady_clock::now();
  double secs = std::chrono::duration<double>(t1 - t0).count();
  stage_b.out.report.throughput_fps =
      secs > 0 ? scenario.frames.size() / secs : 0.0;
  return std::move(stage_b.out);
}

namespace {

json hop_json(const v2x::HopStats& h) {
  return {{"median_ms", h.median_ms}, {"p95_ms", h.p95_ms}};
}

json eval_json(const viol::EvalReport& e) {
  json j;
  j["per_class"] = json::object();
  for (const auto& [cls, m] : e.per_class)
    j["per_class"][cls] = {{"tp", m.tp},
                           {"fp", m.fp},
                           {"fn", m.fn},
                           {"precision", m.precision},
                           {"recall", m.recall},
                           {"fp_rate", m.fp_rate}};
  j["overall"] = {{"tp", e.overall.tp},       {"fp", e.overall.fp},
                  {"fn", e.overall.fn},       {"precision", e.overall.precision},
                  {"recall", e.overall.recall}, {"fp_rate", e.overall.fp_rate}};
  j["speed_mae_kmh"] = e.speed_mae_kmh ? json(*e.speed_mae_kmh) : json(nullptr);
  j["speed_samples"] = e.speed_samples;
  return j;
}

}  // namespace

std::string RunReport::to_json() const {
  json j;
  j["frames_processed"] = frames_processed;
  j["events_total"] = events_total;
  j["messages_forwarded"] = messages_forwarded;
  j["drops"] = {{"dup", drops_dup}, {"rate", drops_rate}};
  j["dead_letters"] = dead_letters;
  j["plate_ballots"] = plate_ballots;
  j["plate_decided"] = plate_decided;
  j["plate_decision_rate"] = plate_decision_rate;
  j["throughput_fps"] = throughput_fps;
  if (latency) {
    j["latency"] = {{"frame_to_log", hop_json(latency->frame_to_log)},
                    {"node_to_broker", hop_json(latency->node_to_broker)},
                    {"broker_to_endpoint", hop_json(latency->broker_to_endpoint)},
                    {"end_to_end", hop_json(latency->end_to_end)},
                    {"samples", latency->samples}};
  }
  if (has_ground_truth) j["eval"] = eval_json(eval);
  return j.dump(2);
}

RunReport run_to_files(const std::string& trace_path, const PipelineConfig& config,
                       std::uint64_t seed, const std::string& out_dir,
                       const std::optional<std::string>& zones_path) {
  trace::Scenario scenario = trace::read_trace(trace_path);
  std::optional<roi::ZoneSet> zones;
  if (zones_path) {
    std::ifstream zin(*zones_path);
    if (!zin) throw IoFailure(*zones_path);
    std::string text((std::istreambuf_iterator<char>(zin)), std::istreambuf_iterator<char>());
    zones = roi::zoneset_from_json(text, config.roi, scenario.width, scenario.height);
  }
  RunOutput out = run(scenario, config, seed, zones);

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream ev(out_dir + "/events.jsonl", std::ios::trunc);
    if (!ev) throw IoFailure(out_dir + "/events.jsonl");
    for (const auto& e : out.events) ev << viol::event_to_json_line(e) << "\n";
  }
  {
    std::ofstream ms(out_dir + "/messages.jsonl", std::ios::trunc);
    if (!ms) throw IoFailure(out_dir + "/messages.jsonl");
    for (const auto& p : out.message_log) ms << p << "\n";
  }
  if (!out.dead_letters.empty()) {
    std::ofstream dl(out_dir + "/dead_letters.jsonl", std::ios::trunc);
    for (const auto& d : out.dead_letters) {
      json j = {{"topic", d.topic}, {"payload", d.payload}, {"reason", d.reason}};
      dl << j.dump() << "\n";
    }
  }
  {
    std::ofstream rp(out_dir + "/report.json", std::ios::trunc);
    if (!rp) throw IoFailure(out_dir + "/report.json");
    rp << out.report.to_json() << "\n";
  }
  return out.report;
}

std::string BenchReport::to_json() const {
  json j;
  j["fps_mean"] = fps_mean;
  j["fps_std"] = fps_std;
  j["repetitions"] = repetitions;
  j["stages_us_per_frame"] = {{"read", stages.read_us_per_frame},
                              {"tracker", stages.tracker_us_per_frame},
                              {"zones_total", stages.zones_us_total},
                              {"violations_plate", stages.violations_us_per_frame},
                              {"v2x", stages.v2x_us_per_frame}};
  return j.dump(2);
}

BenchReport bench(const std::string& trace_path, const PipelineConfig& config,
                  int repetitions) {
  if (repetitions < 3) throw InputError("bench needs at least 3 repetitions");
  using clock = std::chrono::steady_clock;
  std::vector<double> fps;
  StageTiming acc;
  for (int rep = 0; rep < repetitions; ++rep) {
    auto tr0 = clock::now();
    trace::Scenario scenario = trace::read_trace(trace_path);
    auto tr1 = clock::now();

    const size_t n = scenario.frames.size();
    track::Tracker tracker(config.tracker);
    StageB stage_b(config, scenario, 1);
    std::vector<trace::DetectionFrame> calibration;
    double track_us = 0.0, viol_us = 0.0, zones_us = 0.0, v2x_us = 0.0;
    stage_b.v2x_us_acc = &v2x_us;
    auto run0 = clock::now();
    for (const auto& frame : scenario.frames) {
      auto a0 = clock::now();
      const auto& tracks = tracker.step(frame);
      auto a1 = clock::now();
      track_us += std::chrono::duration<double, std::micro>(a1 - a0).count();
      if (!stage_b.engine) {
        calibration.push_back(frame);
        if (static_cast<int>(calibration.size()) >= config.roi.calibration_frames) {
          auto z0 = clock::now();
          auto zones =
              roi::derive_zones(calibration, config.roi, scenario.width, scenario.height);
          auto z1 = clock::now();
          zones_us += std::chrono::duration<double, std::micro>(z1 - z0).count();
          stage_b.engine.emplace(std::move(zones), config.violations, scenario.frame_rate);
          calibration.clear();
        }
      }
      auto b0 = clock::now();
      stage_b.process({frame, tracks, false});
      auto b1 = clock::now();
      viol_us += std::chrono::duration<double, std::micro>(b1 - b0).count();
    }
    auto run1 = clock::now();
    double total_s = std::chrono::duration<double>(run1 - run0).count();
    if (n > 0 && total_s > 0) fps.push_back(n / total_s);
    if (n > 0) {
      acc.read_us_per_frame += std::chrono::duration<double, std::micro>(tr1 - tr0).count() / n;
      acc.tracker_us_per_frame += track_us / n;
      acc.violations_us_per_frame += (viol_us - v2x_us) / n;
      acc.v2x_us_per_frame += v2x_us / n;
      acc.zones_us_total += zones_us;
    }
  }
  BenchReport r;
  r.repetitions = repetitions;
  double mean = 0.0;
  for (double f : fps) mean += f;
  mean = fps.empty() ? 0.0 : mean / fps.size();
  double var = 0.0;
  for (double f : fps) var += (f - mean) * (f - mean);
  r.fps_mean = mean;
  r.fps_std = fps.size() > 1 ? std::sqrt(var / (fps.size() - 1)) : 0.0;
  r.stages.read_us_per_frame = acc.read_us_per_frame / repetitions;
  r.stages.tracker_us_per_frame = acc.tracker_us_per_frame / repetitions;
  r.stages.zones_us_total = acc.zones_us_total / repetitions;
  r.stages.violations_us_per_frame = acc.violations_us_per_frame / repetitions;
  r.stages.v2x_us_per_frame = acc.v2x_us_per_frame / repetitions;
  return r;
}

}  // namespace rnode::pipe
