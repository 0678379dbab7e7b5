#include "violations.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace rnode::viol {

using geom::Point;
using nlohmann::json;

std::string to_string(ViolationClass c) {
  switch (c) {
    case ViolationClass::SIGNAL_JUMP: return "SIGNAL_JUMP";
    case ViolationClass::ZEBRA_BREACH: return "ZEBRA_BREACH";
    case ViolationClass::WRONG_WAY: return "WRONG_WAY";
    case ViolationClass::ILLEGAL_UTURN: return "ILLEGAL_UTURN";
    case ViolationClass::SPEEDING: return "SPEEDING";
  }
  return "SIGNAL_JUMP";
}

ViolationClass violation_from_string(const std::string& s) {
  if (s == "SIGNAL_JUMP") return ViolationClass::SIGNAL_JUMP;
  if (s == "ZEBRA_BREACH") return ViolationClass::ZEBRA_BREACH;
  if (s == "WRONG_WAY") return ViolationClass::WRONG_WAY;
  if (s == "ILLEGAL_UTURN") return ViolationClass::ILLEGAL_UTURN;
  if (s == "SPEEDING") return ViolationClass::SPEEDING;
  throw InputError("unknown violation class: " + s);
}

std::optional<Crossing> crossed_line(const track::Track& track, const geom::Segment& line,
                                     Point lane_vector) {
  // Last two observed positions; coasting entries do not count.
  const auto& h = track.history;
  if (h.size() < 2) return std::nullopt;
  std::optional<Point> cur, prev;
  std::int64_t cur_frame = 0;
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (!it->observed) continue;
    if (!cur) {
      cur = it->bottom_center;
      cur_frame = it->frame_index;
    } else {
      prev = it->bottom_center;
      break;
    }
  }
  if (!cur || !prev) return std::nullopt;
  if (*cur == *prev) return std::nullopt;
  if (!geom::segments_intersect({*prev, *cur}, line)) return std::nullopt;
  return Crossing{cur_frame, geom::dot(*cur - *prev, lane_vector)};
}

ViolationEvent ViolationEngine::make_event(ViolationClass cls, const track::Track& t,
                                           const trace::DetectionFrame& f, Point loc,
                                           double conf) {
  ViolationEvent e;
  e.event_id = next_event_id_++;
  e.violation_class = cls;
  e.track_id = t.track_id;
  e.frame_index = f.frame_index;
  e.t_capture = f.t_capture;
  e.t_mono_detect = f.t_mono;
  e.confidence = conf;
  e.location = loc;
  return e;
}

std::vector<ViolationEvent> ViolationEngine::process(const std::vector<track::Track>& tracks,
                                                     const trace::DetectionFrame& frame) {
  std::vector<ViolationEvent> out;
  for (const auto& t : tracks) {
    if (t.status != track::TrackStatus::CONFIRMED) continue;
    if (t.history.empty() || t.history.back().frame_index != frame.frame_index) continue;
    if (!t.history.back().observed) continue;

    TrackState& st = state_[t.track_id];
    Point cur = t.history.back().bottom_center;
    std::optional<Point> prev;
    if (st.has_observed) prev = st.last_observed;

    auto fired = [&](ViolationClass c) -> bool& { return st.fired[static_cast<int>(c)]; };

    // Signal jump: stop-line crossing in the traffic direction during red.
    if (zones_.stop_line && prev && frame.signal_phase == trace::SignalPhase::RED &&
        !fired(ViolationClass::SIGNAL_JUMP)) {
      if (auto c = crossed_line(t, *zones_.stop_line, zones_.lane_vector);
          c && c->direction > 0) {
        fired(ViolationClass::SIGNAL_JUMP) = true;
        out.push_back(make_event(ViolationClass::SIGNAL_JUMP, t, frame, cur, 1.0));
      }
    }

    // Zebra breach: halted on the crosswalk during red.
    if (zones_.zebra && prev && !fired(ViolationClass::ZEBRA_BREACH)) {
      bool halted = geom::norm(cur - *prev) < cfg_.stop_eps_px;
      if (frame.signal_phase == trace::SignalPhase::RED && zones_.zebra->contains(cur) &&
          halted) {
        if (++st.halt_streak >= cfg_.hold_frames) {
          fired(ViolationClass::ZEBRA_BREACH) = true;
          out.push_back(make_event(ViolationClass::ZEBRA_BREACH, t, frame, cur, 1.0));
        }
      } else {
        st.halt_streak = 0;
      }
    }

    // Wrong way: mean displacement over the last W frames opposes the lane vector.
    st.window.emplace_back(frame.frame_index, cur);
    while (static_cast<int>(st.window.size()) > cfg_.wrongway_window + 1)
      st.window.erase(st.window.begin());
    if (static_cast<int>(st.window.size()) == cfg_.wrongway_window + 1 &&
        !fired(ViolationClass::WRONG_WAY)) {
      Point vi = (cur - st.window.front().second) * (1.0 / cfg_.wrongway_window);
      if (geom::norm(vi) > cfg_.wrongway_min_motion &&
          geom::dot(vi, zones_.lane_vector) < 0.0) {
        if (++st.wrongway_streak >= cfg_.wrongway_persist) {
          int neg = 0;
          for (size_t i = 1; i < st.window.size(); ++i) {
            Point d = st.window[i].second - st.window[i - 1].second;
            if (geom::dot(d, zones_.lane_vector) < 0.0) ++neg;
          }
          double conf = static_cast<double>(neg) / cfg_.wrongway_window;
          fired(ViolationClass::WRONG_WAY) = true;
          out.push_back(make_event(ViolationClass::WRONG_WAY, t, frame, cur, conf));
        }
      } else {
        st.wrongway_streak = 0;
      }
    }

    // U-turn: ordered A->B->C (or reverse) traversal with a heading reversal.
    if (zones_.divider_zones && prev && !fired(ViolationClass::ILLEGAL_UTURN)) {
      const auto& dz = *zones_.divider_zones;
      int zone = -1;
      if (dz.a.contains(cur)) zone = 0;
      else if (dz.b.contains(cur)) zone = 1;
      else if (dz.c.contains(cur)) zone = 2;
      if (zone != st.current_zone) {
        if (zone >= 0) st.zone_entries.emplace_back(zone, frame.frame_index, cur - *prev);
        st.current_zone = zone;
      }
      const auto& ze = st.zone_entries;
      if (ze.size() >= 3) {
        const auto& [z2, f2, d2] = ze[ze.size() - 1];
        const auto& [z1, f1, d1] = ze[ze.size() - 2];
        const auto& [z0, f0, d0] = ze[ze.size() - 3];
        bool ordered = (z0 == 0 && z1 == 1 && z2 == 2) || (z0 == 2 && z1 == 1 && z2 == 0);
        double span_s = (f2 - f0) * frame_interval_;
        if (ordered && span_s <= cfg_.uturn_window_s) {
          double n0 = geom::norm(d0), n2 = geom::norm(d2);
          if (n0 > 0 && n2 > 0) {
            double cosang = geom::dot(d0, d2) / (n0 * n2);
            double ang = std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 / M_PI;
            if (ang >= cfg_.uturn_heading_deg) {
              fired(ViolationClass::ILLEGAL_UTURN) = true;
              out.push_back(make_event(ViolationClass::ILLEGAL_UTURN, t, frame, cur, 1.0));
            }
          }
        }
      }
    }

    // Speeding: start/stop virtual lines, Eq. v = d / (N * T_F).
    if (zones_.speed_lines && prev) {
      const auto& sl = *zones_.speed_lines;
      if (auto c = crossed_line(t, sl.start, zones_.lane_vector); c && c->direction > 0) {
        st.speed_start_frame = frame.frame_index;
      }
      if (auto c = crossed_line(t, sl.stop, zones_.lane_vector);
          c && c->direction > 0 && st.speed_start_frame) {
        std::int64_t n = frame.frame_index - *st.speed_start_frame;
        if (n >= 1) {
          double v_kmh = 3.6 * sl.distance_m / (n * frame_interval_);
          measurements_.push_back({t.track_id, frame.frame_index, n, v_kmh});
          // Fires at most once per start/stop traversal; the pending start is
          // cleared below, so repeated traversals can fire again.
          if (v_kmh > cfg_.speed_limit_kmh) {
            ViolationEvent e = make_event(ViolationClass::SPEEDING, t, frame, cur, 1.0);
            e.speed_kmh = v_kmh;
            out.push_back(std::move(e));
          }
        }
        st.speed_start_frame.reset();
      }
    }

    st.last_observed = cur;
    st.last_observed_frame = frame.frame_index;
    st.has_observed = true;
  }
  return out;
}

std::string event_to_json_line(const ViolationEvent& e) {
  json j;
  j["event_id"] = e.event_id;
  j["class"] = to_string(e.violation_class);
  j["track_id"] = e.track_id;
  j["frame"] = e.frame_index;
  j["t_utc_us"] = e.t_capture;
  j["t_mono_us"] = e.t_mono_detect;
  j["conf"] = e.confidence;
  j["speed_kmh"] = e.speed_kmh ? json(*e.speed_kmh) : json(nullptr);
  j["loc"] = {e.location.x, e.location.y};
  j["plate"] = e.plate_best ? json(*e.plate_best) : json(nullptr);
  return j.dump();
}

ViolationEvent event_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& ex) {
    throw InputError(std::string("bad event record: ") + ex.what());
  }
  ViolationEvent e;
  e.event_id = j.at("event_id").get<std::int64_t>();
  e.violation_class = violation_from_string(j.at("class").get<std::string>());
  e.track_id = j.at("track_id").get<std::int64_t>();
  e.frame_index = j.at("frame").get<std::int64_t>();
  e.t_capture = j.at("t_utc_us").get<std::int64_t>();
  e.t_mono_detect = j.at("t_mono_us").get<std::int64_t>();
  e.confidence = j.at("conf").get<double>();
  if (!j.at("speed_kmh").is_null()) e.speed_kmh = j["speed_kmh"].get<double>();
  e.location = {j.at("loc")[0].get<double>(), j.at("loc")[1].get<double>()};
  if (!j.at("plate").is_null()) e.plate_best = j["plate"].get<std::string>();
  return e;
}

namespace {

ClassMetrics finalize(ClassMetrics m) {
  m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 1.0;
  m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 1.0;
  m.fp_rate = (m.tp + m.fp) > 0 ? static_cast<double>(m.fp) / (m.tp + m.fp) : 0.0;
  return m;
}

}  // namespace

EvalReport evaluate(const std::vector<ViolationEvent>& events,
                    const std::vector<SpeedMeasurement>& measurements,
                    const std::vector<trace::GroundTruthRecord>& ground_truth,
                    int slack_frames) {
  EvalReport rep;
  std::map<std::string, std::vector<const trace::GroundTruthRecord*>> gt_by_class;
  for (const auto& g : ground_truth) gt_by_class[g.violation_class].push_back(&g);

  std::map<std::string, ClassMetrics> metrics;
  for (const auto& [cls, gts] : gt_by_class) metrics[cls];  // ensure entry
  for (const auto& e : events) metrics[to_string(e.violation_class)];

  for (auto& [cls, m] : metrics) {
    std::vector<const trace::GroundTruthRecord*> gts;
    if (auto it = gt_by_class.find(cls); it != gt_by_class.end()) gts = it->second;
    std::vector<char> gt_used(gts.size(), 0);
    for (const auto& e : events) {
      if (to_string(e.violation_class) != cls) continue;
      int best = -1;
      std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
      for (size_t gi = 0; gi < gts.size(); ++gi) {
        if (gt_used[gi]) continue;
        std::int64_t lo = gts[gi]->span_begin - slack_frames;
        std::int64_t hi = gts[gi]->span_end + slack_frames;
        if (e.frame_index < lo || e.frame_index > hi) continue;
        std::int64_t d = 0;
        if (e.frame_index < gts[gi]->span_begin) d = gts[gi]->span_begin - e.frame_index;
        if (e.frame_index > gts[gi]->span_end) d = e.frame_index - gts[gi]->span_end;
        if (d < best_dist) {
          best_dist = d;
          best = static_cast<int>(gi);
        }
      }
      if (best >= 0) {
        gt_used[best] = 1;
        m.tp += 1;
      } else {
        m.fp += 1;
      }
    }
    for (size_t gi = 0; gi < gts.size(); ++gi)
      if (!gt_used[gi]) m.fn += 1;
  }

  ClassMetrics overall;
  for (auto& [cls, m] : metrics) {
    overall.tp += m.tp;
    overall.fp += m.fp;
    overall.fn += m.fn;
    rep.per_class[cls] = finalize(m);
  }
  rep.overall = finalize(overall);

  // Speed MAE over measurements matched to ground-truth true speeds.
  std::vector<const trace::GroundTruthRecord*> spd;
  for (const auto& g : ground_truth)
    if (g.true_speed_kmh) spd.push_back(&g);
  std::vector<char> used(spd.size(), 0);
  double abs_err = 0.0;
  int n = 0;
  for (const auto& ms : measurements) {
    int best = -1;
    std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
    for (size_t gi = 0; gi < spd.size(); ++gi) {
      if (used[gi]) continue;
      std::int64_t lo = spd[gi]->span_begin - slack_frames;
      std::int64_t hi = spd[gi]->span_end + slack_frames;
      if (ms.frame_index < lo || ms.frame_index > hi) continue;
      std::int64_t d = 0;
      if (ms.frame_index < spd[gi]->span_begin) d = spd[gi]->span_begin - ms.frame_index;
      if (ms.frame_index > spd[gi]->span_end) d = ms.frame_index - spd[gi]->span_end;
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(gi);
      }
    }
    if (best >= 0) {
      used[best] = 1;
      abs_err += std::abs(ms.speed_kmh - *spd[best]->true_speed_kmh);
      ++n;
    }
  }
  if (n > 0) rep.speed_mae_kmh = abs_err / n;
  rep.speed_samples = n;
  return rep;
}

}  // namespace rnode::viol
