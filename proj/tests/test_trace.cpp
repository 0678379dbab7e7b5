#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "../src/core/errors.hpp"
#include "../src/core/scenario_gen.hpp"
#include "../src/core/trace.hpp"

using namespace rnode::trace;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

Scenario tiny_scenario() {
  Scenario s;
  s.frame_rate = 30;
  s.width = 640;
  s.height = 480;
  for (int i = 0; i < 3; ++i) {
    DetectionFrame f;
    f.frame_index = i;
    f.t_capture = 1000000 + i * 33333;
    f.t_mono = i * 33333;
    f.signal_phase = i == 2 ? SignalPhase::RED : SignalPhase::GREEN;
    Detection d;
    d.class_id = ObjectClass::VEHICLE;
    d.bbox = {10.0 + i, 20.0, 30, 40};
    d.confidence = 0.9;
    d.embedding = {0.6, 0.8};
    f.detections.push_back(d);
    s.frames.push_back(f);
  }
  s.ground_truth.push_back({"SPEEDING", "car0", 0, 2, 72.5});
  return s;
}

}  // namespace

TEST_CASE("empty file reads as an empty scenario") {
  auto path = tmp_path("rnode_empty.jsonl");
  std::ofstream(path).close();
  auto s = read_trace(path);
  CHECK(s.frames.empty());
  std::remove(path.c_str());
}

TEST_CASE("zero-frame scenario writes a header-only file") {
  auto path = tmp_path("rnode_header.jsonl");
  Scenario s;
  s.frame_rate = 30;
  write_trace(s, path);
  std::ifstream in(path);
  std::string line, header;
  int lines = 0;
  while (std::getline(in, line))
    if (!line.empty()) {
      ++lines;
      header = line;
    }
  CHECK(lines == 1);
  CHECK(header.find("rnode-trace/1") != std::string::npos);
  CHECK(header.find("30") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("round trip preserves the scenario exactly") {
  auto path = tmp_path("rnode_rt.jsonl");
  auto s = tiny_scenario();
  write_trace(s, path);
  auto back = read_trace(path);
  CHECK(back == s);
  std::remove(path.c_str());
  std::remove((path + ".gt.json").c_str());
}

TEST_CASE("round trip on 100 random generated scenarios") {
  auto path = tmp_path("rnode_rt_rand.jsonl");
  for (int it = 0; it < 100; ++it) {
    ScenarioSpec spec;
    spec.width = 600;
    spec.height = 600;
    spec.num_frames = 12;
    spec.px_per_m = 4;
    spec.lane = RectM{20, 10, 40, 120};
    spec.bbox_jitter_px = 1.0;
    VehicleScript v;
    v.label = "veh" + std::to_string(it);
    v.waypoints_m = {{30, 120}, {30, 20}};
    v.speed_kmh = 50;
    v.plate = "KA01AB1234";
    auto s = generate_scenario(spec, {v}, 1000 + it);
    write_trace(s, path);
    CHECK(read_trace(path) == s);
  }
  std::remove(path.c_str());
  std::remove((path + ".gt.json").c_str());
}

TEST_CASE("non-monotonic frame index is rejected") {
  auto path = tmp_path("rnode_order.jsonl");
  auto s = tiny_scenario();
  write_trace(s, path);
  // Swap two frame lines (header stays on line 1).
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string l;
  while (std::getline(in, l)) lines.push_back(l);
  in.close();
  std::swap(lines[2], lines[3]);
  std::ofstream out(path, std::ios::trunc);
  for (const auto& x : lines) out << x << "\n";
  out.close();
  CHECK_THROWS_AS(read_trace(path), rnode::NonMonotonicTime);
  std::remove(path.c_str());
  std::remove((path + ".gt.json").c_str());
}

TEST_CASE("malformed json line reports the line number") {
  auto path = tmp_path("rnode_bad.jsonl");
  std::ofstream out(path, std::ios::trunc);
  out << R"({"format":"rnode-trace/1","frame_rate":30,"width":640,"height":480})" << "\n";
  out << "{not json\n";
  out.close();
  try {
    read_trace(path);
    FAIL("expected MalformedRecord");
  } catch (const rnode::MalformedRecord& e) {
    CHECK(e.line_no == 2);
  }
  std::remove(path.c_str());
}

TEST_CASE("bbox out of frame bounds is rejected") {
  auto s = tiny_scenario();
  s.frames[1].detections[0].bbox.x = 630;  // 630 + 30 > 640
  CHECK_THROWS_AS(validate(s), rnode::BBoxOutOfBounds);
}

TEST_CASE("non-unit embedding is rejected") {
  auto s = tiny_scenario();
  s.frames[0].detections[0].embedding = {0.5, 0.5};
  CHECK_THROWS(validate(s));
}

TEST_CASE("plate reading only allowed on LICENSE_PLATE detections") {
  auto s = tiny_scenario();
  s.frames[0].detections[0].plate_reading = PlateReading{"KA01AB1234", 0.9};
  CHECK_THROWS(validate(s));
}

TEST_CASE("generate_scenario is deterministic in (spec, vehicles, seed)") {
  ScenarioSpec spec;
  spec.num_frames = 50;
  spec.px_per_m = 4;
  spec.width = 400;
  spec.height = 600;
  spec.lane = RectM{20, 10, 40, 140};
  spec.bbox_jitter_px = 2.0;
  VehicleScript v;
  v.label = "veh";
  v.waypoints_m = {{30, 140}, {30, 20}};
  v.speed_kmh = 60;
  v.plate = "KA01AB1234";
  auto a = generate_scenario(spec, {v}, 42);
  auto b = generate_scenario(spec, {v}, 42);
  CHECK(a == b);
  auto c = generate_scenario(spec, {v}, 43);
  CHECK(a.frames.size() == c.frames.size());
  CHECK(!(a == c));  // different jitter stream
}

TEST_CASE("speed ground truth matches v = d/(N*T_F) on a noiseless run") {
  // 90 km/h = 25 m/s; 100 m at 30 fps is exactly 120 frames.
  double mpf = 25.0 / 30.0;
  ScenarioSpec spec;
  spec.num_frames = 200;
  spec.px_per_m = 2;
  spec.width = 400;
  spec.height = 400;
  spec.lane = RectM{20, 10, 40, 190};
  VehicleScript v;
  v.label = "fast";
  v.waypoints_m = {{30, 180}, {30, 30}};
  v.speed_kmh = 90;
  auto s = generate_scenario(spec, {v}, 1);
  // Bottom-center descends exactly mpf meters per frame.
  std::vector<double> ys;
  for (const auto& f : s.frames)
    for (const auto& d : f.detections)
      if (d.class_id == ObjectClass::VEHICLE) ys.push_back(d.bbox.bottom_center().y);
  REQUIRE(ys.size() > 130);
  for (size_t i = 1; i < ys.size(); ++i)
    CHECK(ys[i - 1] - ys[i] == doctest::Approx(mpf * spec.px_per_m).epsilon(1e-9));
}

TEST_CASE("scripted wrong-way displacement opposes the lane direction") {
  ScenarioSpec spec;
  spec.num_frames = 100;
  spec.px_per_m = 4;
  spec.width = 400;
  spec.height = 600;
  spec.lane = RectM{20, 10, 40, 140};
  VehicleScript v;
  v.label = "ww";
  v.waypoints_m = {{30, 20}, {30, 120}};  // +y, against the -y traffic direction
  v.speed_kmh = 40;
  v.violation = "WRONG_WAY";
  auto s = generate_scenario(spec, {v}, 9);
  std::vector<double> ys;
  for (const auto& f : s.frames)
    for (const auto& d : f.detections)
      if (d.class_id == ObjectClass::VEHICLE) ys.push_back(d.bbox.bottom_center().y);
  for (size_t i = 1; i < ys.size(); ++i) CHECK(ys[i] > ys[i - 1]);
  REQUIRE(s.ground_truth.size() == 1);
  CHECK(s.ground_truth[0].violation_class == "WRONG_WAY");
}

TEST_CASE("infeasible scripts are rejected") {
  ScenarioSpec spec;
  spec.num_frames = 10;
  VehicleScript v;
  v.label = "u";
  v.waypoints_m = {{10, 10}};
  v.violation = "ILLEGAL_UTURN";
  CHECK_THROWS_AS(generate_scenario(spec, {v}, 1), rnode::InfeasibleScript);
}
