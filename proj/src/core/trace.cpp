#include "trace.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace rnode::trace {

using nlohmann::json;

std::string to_string(SignalPhase p) {
  switch (p) {
    case SignalPhase::RED: return "RED";
    case SignalPhase::AMBER: return "AMBER";
    case SignalPhase::GREEN: return "GREEN";
    case SignalPhase::NONE: return "NONE";
  }
  return "NONE";
}

std::string to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::VEHICLE: return "VEHICLE";
    case ObjectClass::TWO_WHEELER: return "TWO_WHEELER";
    case ObjectClass::PEDESTRIAN: return "PEDESTRIAN";
    case ObjectClass::ZEBRA_CROSSING: return "ZEBRA_CROSSING";
    case ObjectClass::LANE: return "LANE";
    case ObjectClass::DIVIDER: return "DIVIDER";
    case ObjectClass::LICENSE_PLATE: return "LICENSE_PLATE";
  }
  return "VEHICLE";
}

SignalPhase phase_from_string(const std::string& s) {
  if (s == "RED") return SignalPhase::RED;
  if (s == "AMBER") return SignalPhase::AMBER;
  if (s == "GREEN") return SignalPhase::GREEN;
  if (s == "NONE") return SignalPhase::NONE;
  throw InputError("unknown signal phase: " + s);
}

ObjectClass class_from_string(const std::string& s) {
  if (s == "VEHICLE") return ObjectClass::VEHICLE;
  if (s == "TWO_WHEELER") return ObjectClass::TWO_WHEELER;
  if (s == "PEDESTRIAN") return ObjectClass::PEDESTRIAN;
  if (s == "ZEBRA_CROSSING") return ObjectClass::ZEBRA_CROSSING;
  if (s == "LANE") return ObjectClass::LANE;
  if (s == "DIVIDER") return ObjectClass::DIVIDER;
  if (s == "LICENSE_PLATE") return ObjectClass::LICENSE_PLATE;
  throw InputError("unknown object class: " + s);
}

namespace {

void validate_detection(const Detection& d, const Scenario& s, std::int64_t frame_index) {
  if (d.bbox.w <= 0 || d.bbox.h <= 0 || d.bbox.x < 0 || d.bbox.y < 0 ||
      d.bbox.x + d.bbox.w > s.width || d.bbox.y + d.bbox.h > s.height) {
    throw BBoxOutOfBounds(frame_index);
  }
  if (d.confidence < 0.0 || d.confidence > 1.0)
    throw InputError("confidence out of [0,1] at frame " + std::to_string(frame_index));
  if (!d.embedding.empty()) {
    double n2 = 0.0;
    for (double v : d.embedding) n2 += v * v;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-6)
      throw InputError("embedding not unit norm at frame " + std::to_string(frame_index));
  }
  if (d.plate_reading && d.class_id != ObjectClass::LICENSE_PLATE)
    throw InputError("plate reading on non-plate detection at frame " +
                     std::to_string(frame_index));
  if (d.plate_reading) {
    const auto& t = d.plate_reading->text;
    if (t.empty() || t.size() > 12)
      throw InputError("bad plate text length at frame " + std::to_string(frame_index));
    for (char c : t)
      if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')))
        throw InputError("bad plate character at frame " + std::to_string(frame_index));
  }
}

}  // namespace

void validate(const Scenario& s) {
  if (s.frame_rate <= 0) throw InputError("frame_rate must be positive");
  std::int64_t last_index = -1;
  std::int64_t last_mono = -1;
  std::int64_t last_cap = -1;
  for (const auto& f : s.frames) {
    if (f.frame_index <= last_index) throw NonMonotonicTime(f.frame_index);
    if (f.t_mono <= last_mono) throw NonMonotonicTime(f.frame_index);
    if (f.t_capture < last_cap) throw NonMonotonicTime(f.frame_index);
    last_index = f.frame_index;
    last_mono = f.t_mono;
    last_cap = f.t_capture;
    for (const auto& d : f.detections) validate_detection(d, s, f.frame_index);
  }
  if (!s.frames.empty()) {
    std::int64_t lo = s.frames.front().frame_index;
    std::int64_t hi = s.frames.back().frame_index;
    for (const auto& g : s.ground_truth) {
      if (g.span_begin > g.span_end || g.span_begin < lo || g.span_end > hi)
        throw InputError("ground-truth span outside trace: " + g.vehicle_label);
    }
  }
}

namespace {

json detection_to_json(const Detection& d) {
  json j;
  j["c"] = to_string(d.class_id);
  j["b"] = {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h};
  j["s"] = d.confidence;
  if (!d.embedding.empty()) j["e"] = d.embedding;
  if (d.plate_reading)
    j["p"] = {{"txt", d.plate_reading->text}, {"s", d.plate_reading->confidence}};
  return j;
}

Detection detection_from_json(const json& j, int line_no) {
  Detection d;
  try {
    d.class_id = class_from_string(j.at("c").get<std::string>());
    const auto& b = j.at("b");
    if (!b.is_array() || b.size() != 4) throw InputError("bbox must be [x,y,w,h]");
    d.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    d.confidence = j.at("s").get<double>();
    if (j.contains("e")) d.embedding = j["e"].get<std::vector<double>>();
    if (j.contains("p")) {
      PlateReading pr;
      pr.text = j["p"].at("txt").get<std::string>();
      pr.confidence = j["p"].at("s").get<double>();
      d.plate_reading = pr;
    }
  } catch (const json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  }
  return d;
}

}  // namespace

Scenario read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure(path);
  Scenario s;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
    if (!have_header) {
      if (!j.contains("format") || j["format"] != "rnode-trace/1")
        throw MalformedRecord(line_no, "missing rnode-trace/1 header");
      try {
        s.frame_rate = j.at("frame_rate").get<double>();
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
      } catch (const json::exception& e) {
        throw MalformedRecord(line_no, e.what());
      }
      have_header = true;
      continue;
    }
    DetectionFrame f;
    try {
      f.frame_index = j.at("i").get<std::int64_t>();
      f.t_capture = j.at("tc").get<std::int64_t>();
      f.t_mono = j.at("tm").get<std::int64_t>();
      f.signal_phase = phase_from_string(j.at("phase").get<std::string>());
      for (const auto& dj : j.at("det")) f.detections.push_back(detection_from_json(dj, line_no));
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
    s.frames.push_back(std::move(f));
  }
  // Sidecar ground truth, if present.
  std::ifstream gt(path + ".gt.json");
  if (gt) s.ground_truth = read_ground_truth(path + ".gt.json");
  validate(s);
  return s;
}

void write_trace(const Scenario& s, const std::string& path) {
  validate(s);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure(path);
  json header = {{"format", "rnode-trace/1"},
                 {"frame_rate", s.frame_rate},
                 {"width", s.width},
                 {"height", s.height}};
  out << header.dump() << "\n";
  for (const auto& f : s.frames) {
    json j;
    j["i"] = f.frame_index;
    j["tc"] = f.t_capture;
    j["tm"] = f.t_mono;
    j["phase"] = to_string(f.signal_phase);
    j["det"] = json::array();
    for (const auto& d : f.detections) j["det"].push_back(detection_to_json(d));
    out << j.dump() << "\n";
  }
  if (!out) throw IoFailure(path);
  if (!s.ground_truth.empty()) write_ground_truth(s.ground_truth, path + ".gt.json");
}

std::vector<GroundTruthRecord> read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw MalformedRecord(1, e.what());
  }
  std::vector<GroundTruthRecord> out;
  for (const auto& g : j) {
    GroundTruthRecord r;
    r.violation_class = g.at("class").get<std::string>();
    r.vehicle_label = g.at("label").get<std::string>();
    r.span_begin = g.at("span")[0].get<std::int64_t>();
    r.span_end = g.at("span")[1].get<std::int64_t>();
    if (g.contains("speed_kmh") && !g["speed_kmh"].is_null())
      r.true_speed_kmh = g["speed_kmh"].get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

void write_ground_truth(const std::vector<GroundTruthRecord>& gt, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure(path);
  json j = json::array();
  for (const auto& r : gt) {
    json g;
    g["class"] = r.violation_class;
    g["label"] = r.vehicle_label;
    g["span"] = {r.span_begin, r.span_end};
    g["speed_kmh"] = r.true_speed_kmh ? json(*r.true_speed_kmh) : json(nullptr);
    j.push_back(g);
  }
  out << j.dump(2) << "\n";
}

}  // namespace rnode::trace
