#include "scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "errors.hpp"

namespace rnode::trace {

using nlohmann::json;

namespace {

constexpr std::int64_t kEpochUs = 1700000000000000LL;

// Confusion pairs used to corrupt synthetic plate readings.
const std::vector<std::pair<char, char>> kConfusion = {
    {'O', '0'}, {'I', '1'}, {'B', '8'}, {'S', '5'}};

// Arc-length position along a polyline; clamps at the end.
geom::Point polyline_at(const std::vector<geom::Point>& wp, double s) {
  if (wp.size() == 1) return wp[0];
  for (size_t i = 0; i + 1 < wp.size(); ++i) {
    double seg = geom::norm(wp[i + 1] - wp[i]);
    if (s <= seg || i + 2 == wp.size()) {
      double t = seg > 0 ? std::min(s, seg) / seg : 0.0;
      return wp[i] + (wp[i + 1] - wp[i]) * t;
    }
    s -= seg;
  }
  return wp.back();
}

double polyline_length(const std::vector<geom::Point>& wp) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < wp.size(); ++i) s += geom::norm(wp[i + 1] - wp[i]);
  return s;
}

std::vector<double> label_embedding(const std::string& label, std::uint64_t seed, int dim) {
  std::uint64_t h = seed;
  for (char c : label) h = h * 1099511628211ULL + static_cast<unsigned char>(c);
  std::mt19937_64 rng(h);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> e(dim);
  double n2 = 0.0;
  for (auto& v : e) {
    v = gauss(rng);
    n2 += v * v;
  }
  double n = std::sqrt(n2);
  for (auto& v : e) v /= n;
  return e;
}

SignalPhase phase_at(const std::vector<SignalInterval>& sched, std::int64_t frame) {
  SignalPhase p = SignalPhase::NONE;
  for (const auto& s : sched) {
    if (s.from_frame <= frame) p = s.phase;
    else break;
  }
  return p;
}

RectM rect_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
          j.at(3).get<double>()};
}

json rect_to_json(const RectM& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

void check_feasible(const ScenarioSpec& spec, const std::vector<VehicleScript>& vehicles) {
  for (const auto& v : vehicles) {
    if (v.waypoints_m.empty()) throw InfeasibleScript(v.label + ": no waypoints");
    if (v.violation == "ILLEGAL_UTURN" && spec.dividers.size() < 2)
      throw InfeasibleScript(v.label + ": U-turn scripted with no divider gap");
    if ((v.violation == "SIGNAL_JUMP" || v.violation == "ZEBRA_BREACH") && !spec.zebra)
      throw InfeasibleScript(v.label + ": signal violation scripted with no zebra");
    if ((v.violation == "WRONG_WAY" || v.violation == "SPEEDING") && !spec.lane)
      throw InfeasibleScript(v.label + ": lane violation scripted with no lane");
  }
}

}  // namespace

Scenario generate_scenario(const ScenarioSpec& spec, const std::vector<VehicleScript>& vehicles,
                           std::uint64_t seed) {
  check_feasible(spec, vehicles);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> uni01(0.0, 1.0);

  Scenario sc;
  sc.frame_rate = spec.frame_rate;
  sc.width = spec.width;
  sc.height = spec.height;

  const double step_us = 1e6 / spec.frame_rate;
  const double dt = 1.0 / spec.frame_rate;
  const double veh_w_px = spec.vehicle_w_m * spec.px_per_m;
  const double veh_h_px = spec.vehicle_len_m * spec.px_per_m;

  struct ActiveSpan {
    std::int64_t first = -1, last = -1;
  };
  std::vector<ActiveSpan> spans(vehicles.size());

  std::vector<std::vector<double>> embeds;
  for (const auto& v : vehicles)
    embeds.push_back(label_embedding(v.label, seed, spec.embedding_dim));

  for (std::int64_t fi = 0; fi < spec.num_frames; ++fi) {
    DetectionFrame frame;
    frame.frame_index = fi;
    frame.t_capture = kEpochUs + static_cast<std::int64_t>(std::llround(fi * step_us));
    frame.t_mono = static_cast<std::int64_t>(std::llround(fi * step_us));
    frame.signal_phase = phase_at(spec.signal, fi);

    auto emit_static = [&](ObjectClass cls, const RectM& r) {
      double jx = spec.static_jitter_px * uni(rng);
      double jy = spec.static_jitter_px * uni(rng);
      geom::BBox b{r.x0 * spec.px_per_m + jx, r.y0 * spec.px_per_m + jy,
                   (r.x1 - r.x0) * spec.px_per_m, (r.y1 - r.y0) * spec.px_per_m};
      b.x = std::clamp(b.x, 0.0, spec.width - b.w);
      b.y = std::clamp(b.y, 0.0, spec.height - b.h);
      Detection d;
      d.class_id = cls;
      d.bbox = b;
      d.confidence = 0.9;
      frame.detections.push_back(std::move(d));
    };
    if (spec.zebra) emit_static(ObjectClass::ZEBRA_CROSSING, *spec.zebra);
    if (spec.lane) emit_static(ObjectClass::LANE, *spec.lane);
    for (const auto& dv : spec.dividers) emit_static(ObjectClass::DIVIDER, dv);

    for (size_t vi = 0; vi < vehicles.size(); ++vi) {
      const auto& v = vehicles[vi];
      if (fi < v.start_frame) continue;
      double elapsed = (fi - v.start_frame) * dt;
      double speed_mps = v.speed_kmh / 3.6;
      double s = elapsed * speed_mps;
      if (v.halt_at_m && s > *v.halt_at_m) {
        double t_reach = *v.halt_at_m / speed_mps;
        double t_halt = v.halt_frames * dt;
        if (elapsed <= t_reach + t_halt) s = *v.halt_at_m;
        else s = *v.halt_at_m + (elapsed - t_reach - t_halt) * speed_mps;
      }
      if (s > polyline_length(v.waypoints_m) + 1e-9 && v.waypoints_m.size() > 1) continue;
      geom::Point pm = polyline_at(v.waypoints_m, s);
      geom::Point pp{pm.x * spec.px_per_m, pm.y * spec.px_per_m};  // bottom-center, px

      bool occluded = false;
      for (auto [a, b] : v.occlusions)
        if (fi >= a && fi <= b) occluded = true;

      double jx = spec.bbox_jitter_px * uni(rng);
      double jy = spec.bbox_jitter_px * uni(rng);
      geom::BBox box{pp.x - veh_w_px / 2 + jx, pp.y - veh_h_px + jy, veh_w_px, veh_h_px};
      bool visible = box.x >= 0 && box.y >= 0 && box.x + box.w <= spec.width &&
                     box.y + box.h <= spec.height;

      // Plate corruption draws stay in lockstep whether or not the frame is emitted.
      std::optional<Detection> plate_det;
      if (!v.plate.empty()) {
        std::string text = v.plate;
        for (auto& c : text) {
          double draw = uni01(rng);
          if (draw < spec.plate_corruption_p) {
            for (auto [a, b] : kConfusion) {
              if (c == a) { c = b; break; }
              if (c == b) { c = a; break; }
            }
          }
        }
        double conf = std::clamp(
            0.95 - 2.0 * spec.plate_corruption_p + 0.05 * uni(rng), 0.0, 1.0);
        Detection d;
        d.class_id = ObjectClass::LICENSE_PLATE;
        d.bbox = {box.x + box.w * 0.25, box.y + box.h * 0.4, box.w * 0.5, box.h * 0.2};
        d.confidence = 0.9;
        d.plate_reading = PlateReading{text, conf};
        plate_det = std::move(d);
      }

      if (occluded || !visible) continue;

      Detection d;
      d.class_id = ObjectClass::VEHICLE;
      d.bbox = box;
      d.confidence = 0.92;
      d.embedding = embeds[vi];
      frame.detections.push_back(std::move(d));
      if (plate_det) frame.detections.push_back(std::move(*plate_det));

      if (spans[vi].first < 0) spans[vi].first = fi;
      spans[vi].last = fi;
    }
    sc.frames.push_back(std::move(frame));
  }

  for (size_t vi = 0; vi < vehicles.size(); ++vi) {
    const auto& v = vehicles[vi];
    if (v.violation.empty() || spans[vi].first < 0) continue;
    GroundTruthRecord g;
    g.violation_class = v.violation;
    g.vehicle_label = v.label;
    g.span_begin = spans[vi].first;
    g.span_end = spans[vi].last;
    if (v.violation == "SPEEDING") g.true_speed_kmh = v.speed_kmh;
    sc.ground_truth.push_back(std::move(g));
  }

  validate(sc);
  return sc;
}

ScenarioSpec spec_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw MalformedRecord(1, e.what());
  }
  ScenarioSpec s;
  s.frame_rate = j.value("frame_rate", 30.0);
  s.width = j.value("width", 1920);
  s.height = j.value("height", 1080);
  s.px_per_m = j.value("px_per_m", 10.0);
  s.num_frames = j.at("num_frames").get<std::int64_t>();
  if (j.contains("zebra")) s.zebra = rect_from_json(j["zebra"]);
  if (j.contains("lane")) s.lane = rect_from_json(j["lane"]);
  for (const auto& d : j.value("dividers", json::array())) s.dividers.push_back(rect_from_json(d));
  for (const auto& si : j.value("signal", json::array()))
    s.signal.push_back({si.at("from").get<std::int64_t>(),
                        phase_from_string(si.at("phase").get<std::string>())});
  s.static_jitter_px = j.value("static_jitter_px", 0.0);
  s.bbox_jitter_px = j.value("bbox_jitter_px", 0.0);
  s.plate_corruption_p = j.value("plate_corruption_p", 0.1);
  s.vehicle_w_m = j.value("vehicle_w_m", 1.8);
  s.vehicle_len_m = j.value("vehicle_len_m", 4.0);
  s.embedding_dim = j.value("embedding_dim", 16);
  return s;
}

std::vector<VehicleScript> vehicles_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw MalformedRecord(1, e.what());
  }
  std::vector<VehicleScript> out;
  for (const auto& vj : j.value("vehicles", json::array())) {
    VehicleScript v;
    v.label = vj.at("label").get<std::string>();
    for (const auto& w : vj.at("waypoints_m")) v.waypoints_m.push_back({w[0], w[1]});
    v.speed_kmh = vj.at("speed_kmh").get<double>();
    v.start_frame = vj.value("start_frame", 0);
    v.plate = vj.value("plate", "");
    v.violation = vj.value("violation", "");
    if (vj.contains("halt_at_m")) v.halt_at_m = vj["halt_at_m"].get<double>();
    v.halt_frames = vj.value("halt_frames", 0);
    for (const auto& o : vj.value("occlusions", json::array()))
      v.occlusions.emplace_back(o[0].get<std::int64_t>(), o[1].get<std::int64_t>());
    out.push_back(std::move(v));
  }
  return out;
}

void spec_to_json_file(const ScenarioSpec& spec, const std::vector<VehicleScript>& vehicles,
                       const std::string& path) {
  json j;
  j["frame_rate"] = spec.frame_rate;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["px_per_m"] = spec.px_per_m;
  j["num_frames"] = spec.num_frames;
  if (spec.zebra) j["zebra"] = rect_to_json(*spec.zebra);
  if (spec.lane) j["lane"] = rect_to_json(*spec.lane);
  j["dividers"] = json::array();
  for (const auto& d : spec.dividers) j["dividers"].push_back(rect_to_json(d));
  j["signal"] = json::array();
  for (const auto& s : spec.signal)
    j["signal"].push_back({{"from", s.from_frame}, {"phase", to_string(s.phase)}});
  j["static_jitter_px"] = spec.static_jitter_px;
  j["bbox_jitter_px"] = spec.bbox_jitter_px;
  j["plate_corruption_p"] = spec.plate_corruption_p;
  j["vehicle_w_m"] = spec.vehicle_w_m;
  j["vehicle_len_m"] = spec.vehicle_len_m;
  j["embedding_dim"] = spec.embedding_dim;
  j["vehicles"] = json::array();
  for (const auto& v : vehicles) {
    json vj;
    vj["label"] = v.label;
    vj["waypoints_m"] = json::array();
    for (const auto& w : v.waypoints_m) vj["waypoints_m"].push_back({w.x, w.y});
    vj["speed_kmh"] = v.speed_kmh;
    vj["start_frame"] = v.start_frame;
    if (!v.plate.empty()) vj["plate"] = v.plate;
    if (!v.violation.empty()) vj["violation"] = v.violation;
    if (v.halt_at_m) vj["halt_at_m"] = *v.halt_at_m;
    if (v.halt_frames) vj["halt_frames"] = v.halt_frames;
    if (!v.occlusions.empty()) {
      vj["occlusions"] = json::array();
      for (auto [a, b] : v.occlusions) vj["occlusions"].push_back({a, b});
    }
    j["vehicles"].push_back(std::move(vj));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure(path);
  out << j.dump(2) << "\n";
}

}  // namespace rnode::trace
