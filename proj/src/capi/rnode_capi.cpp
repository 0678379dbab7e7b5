#include "rnode/rnode.h"

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "../core/errors.hpp"
#include "../core/pipeline.hpp"
#include "../core/scenario_gen.hpp"

struct rnode_result {
  std::string json;
  std::string error;
  bool ok = false;
};

namespace {

rnode_status finish(rnode_result** out, rnode_status st, std::string json,
                    std::string error) {
  if (out) {
    auto* r = new rnode_result;
    r->ok = st == RNODE_OK;
    r->json = std::move(json);
    r->error = std::move(error);
    *out = r;
  }
  return st;
}

template <typename Fn>
rnode_status guarded(rnode_result** out, Fn&& fn) {
  try {
    return finish(out, RNODE_OK, fn(), {});
  } catch (const rnode::InputError& e) {
    return finish(out, RNODE_ERR_INPUT, {}, e.what());
  } catch (const std::exception& e) {
    return finish(out, RNODE_ERR_INTERNAL, {}, e.what());
  }
}

rnode::pipe::PipelineConfig load_config(const char* config_path) {
  if (config_path && *config_path) return rnode::pipe::config_from_json_file(config_path);
  return rnode::pipe::apply_env_overrides({});
}

}  // namespace

extern "C" {

const char* rnode_result_json(const rnode_result* result) {
  return result && result->ok ? result->json.c_str() : nullptr;
}

const char* rnode_result_error(const rnode_result* result) {
  return result && !result->ok ? result->error.c_str() : nullptr;
}

void rnode_result_free(rnode_result* result) { delete result; }

const char* rnode_version(void) { return "rnode 1.0.0"; }

rnode_status rnode_run(const char* trace_path, const char* config_path,
                       const char* zones_path, const char* out_dir, uint64_t seed,
                       int realtime, int pipelined, rnode_result** result) {
  if (!trace_path || !out_dir)
    return finish(result, RNODE_ERR_INPUT, {}, "trace_path and out_dir are required");
  return guarded(result, [&] {
    auto cfg = load_config(config_path);
    cfg.realtime = realtime != 0;
    cfg.pipelined = pipelined != 0;
    std::optional<std::string> zones;
    if (zones_path && *zones_path) zones = zones_path;
    auto report = rnode::pipe::run_to_files(trace_path, cfg, seed, out_dir, zones);
    return report.to_json();
  });
}

rnode_status rnode_generate(const char* spec_path, uint64_t seed, const char* out_path,
                            rnode_result** result) {
  if (!spec_path || !out_path)
    return finish(result, RNODE_ERR_INPUT, {}, "spec_path and out_path are required");
  return guarded(result, [&] {
    auto spec = rnode::trace::spec_from_json_file(spec_path);
    auto vehicles = rnode::trace::vehicles_from_json_file(spec_path);
    auto scenario = rnode::trace::generate_scenario(spec, vehicles, seed);
    rnode::trace::write_trace(scenario, out_path);
    nlohmann::json j = {{"frames", scenario.frames.size()},
                        {"ground_truth", scenario.ground_truth.size()},
                        {"out", out_path}};
    return j.dump(2);
  });
}

rnode_status rnode_evaluate(const char* events_path, const char* gt_path,
                            rnode_result** result) {
  if (!events_path || !gt_path)
    return finish(result, RNODE_ERR_INPUT, {}, "events_path and gt_path are required");
  return guarded(result, [&] {
    std::ifstream in(events_path);
    if (!in) throw rnode::IoFailure(events_path);
    std::vector<rnode::viol::ViolationEvent> events;
    std::vector<rnode::viol::SpeedMeasurement> measurements;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto e = rnode::viol::event_from_json_line(line);
      if (e.speed_kmh)
        measurements.push_back({e.track_id, e.frame_index, 0, *e.speed_kmh});
      events.push_back(std::move(e));
    }
    auto gt = rnode::trace::read_ground_truth(gt_path);
    auto rep = rnode::viol::evaluate(events, measurements, gt);
    nlohmann::json j;
    for (const auto& [cls, m] : rep.per_class)
      j["per_class"][cls] = {{"tp", m.tp},          {"fp", m.fp},
                             {"fn", m.fn},          {"precision", m.precision},
                             {"recall", m.recall},  {"fp_rate", m.fp_rate}};
    j["overall"] = {{"tp", rep.overall.tp},
                    {"fp", rep.overall.fp},
                    {"fn", rep.overall.fn},
                    {"precision", rep.overall.precision},
                    {"recall", rep.overall.recall},
                    {"fp_rate", rep.overall.fp_rate}};
    j["speed_mae_kmh"] = rep.speed_mae_kmh ? nlohmann::json(*rep.speed_mae_kmh)
                                           : nlohmann::json(nullptr);
    j["speed_samples"] = rep.speed_samples;
    return j.dump(2);
  });
}

rnode_status rnode_bench(const char* trace_path, const char* config_path, int repetitions,
                         rnode_result** result) {
  if (!trace_path) return finish(result, RNODE_ERR_INPUT, {}, "trace_path is required");
  return guarded(result, [&] {
    auto cfg = load_config(config_path);
    auto rep = rnode::pipe::bench(trace_path, cfg, repetitions);
    return rep.to_json();
  });
}

rnode_status rnode_derive_zones(const char* trace_path, const char* config_path,
                                const char* out_path, rnode_result** result) {
  if (!trace_path || !out_path)
    return finish(result, RNODE_ERR_INPUT, {}, "trace_path and out_path are required");
  return guarded(result, [&] {
    auto cfg = load_config(config_path);
    auto scenario = rnode::trace::read_trace(trace_path);
    std::vector<rnode::trace::DetectionFrame> calib;
    for (const auto& f : scenario.frames) {
      calib.push_back(f);
      if (static_cast<int>(calib.size()) >= cfg.roi.calibration_frames) break;
    }
    auto zones = rnode::roi::derive_zones(calib, cfg.roi, scenario.width, scenario.height);
    std::string doc = rnode::roi::zoneset_to_json(zones);
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw rnode::IoFailure(out_path);
    out << doc << "\n";
    nlohmann::json j = {{"out", out_path}, {"calibration_frames", calib.size()}};
    return j.dump(2);
  });
}

}  // extern "C"
