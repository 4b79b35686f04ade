// Copyright 2026 The proxattr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Synthetic multi-occupancy scenarios with ground-truth actors, an
// independent window-by-window reference attribution, and scoring.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <ranges>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "proxattr/discrimination.hpp"
#include "proxattr/error.hpp"
#include "proxattr/interaction.hpp"
#include "proxattr/io.hpp"
#include "proxattr/model.hpp"

namespace proxattr {

struct ScenarioParams {
  std::uint64_t seed = 42;
  int n_users = 2;
  int n_sensors = 4;
  std::int64_t duration_ms = 600'000;
  double noise_m = 0.0;           // radius of uniform position noise
  double min_separation_m = 1.5;  // area gap, and clearance other users keep from a used area
  std::int64_t delta_ms = kDefaultDeltaMs;
  double sample_hz = 10.0;
  double room_width_m = 10.0;
  double room_depth_m = 8.0;
  double area_side_m = 0.8;
  double walk_speed_mps = 1.0;
  double untracked_events_per_min = 0.0;  // activations by people without a tag
};

struct TruthKey {
  std::string sensor_id;
  Timestamp t;

  friend auto operator<=>(const TruthKey&, const TruthKey&) = default;
};

/// Actor per raw sensor event; untracked actors are labelled `others`.
using Truth = std::map<TruthKey, std::string>;

struct Scenario {
  ScenarioParams params;
  std::vector<SensorModel> layout;
  std::vector<LocationSample> locations;  // reported (noisy) positions
  std::vector<SensorSample> sensors;
  Truth truth;
};

namespace detail {

/// Portable uniform draws; std:: distributions differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 eng_;
};

inline double box_distance(const BBox& a, const BBox& b) {
  const double dx = std::max({0.0, a.min.x - b.max.x, b.min.x - a.max.x});
  const double dy = std::max({0.0, a.min.y - b.max.y, b.min.y - a.max.y});
  return std::hypot(dx, dy);
}

inline std::string user_name(int i) {
  if (i < 26) return std::string(1, static_cast<char>('A' + i));
  return "U" + std::to_string(i);
}

inline std::string sensor_name(int i) {
  static const char* kNames[] = {"cutlery", "dishwasher", "fridge", "microwave"};
  if (i < 4) return kNames[i];
  return "sensor" + std::to_string(i);
}

inline Policy sensor_policy(int i) {
  // cutlery/microwave exclusive, dishwasher/fridge multiple, then alternating
  static const Policy kPolicies[] = {Policy::Exclusive, Policy::Multiple, Policy::Multiple,
                                     Policy::Exclusive};
  if (i < 4) return kPolicies[i];
  return i % 2 == 0 ? Policy::Exclusive : Policy::Multiple;
}

struct Candidate {
  int sensor = 0;
  std::int64_t t = 0;
  double value = 0.0;
  int actor = -1;  // -1: untracked
};

}  // namespace detail

/// Random-waypoint kitchen: users walk between sensor areas and wander
/// points, dwelling at areas and opening/closing the sensor there. An event
/// is kept only if every other tracked user's true per-window bounding box
/// stays at least `min_separation_m` from the sensor's inner area.
inline Scenario generate_scenario(const ScenarioParams& p) {
  if (p.n_users < 1) throw Error(Errc::InvalidArgument, "need at least one user");
  if (p.n_sensors < 1) throw Error(Errc::InvalidArgument, "need at least one sensor");
  if (p.duration_ms <= 0) throw Error(Errc::InvalidArgument, "duration must be positive");
  if (!(p.noise_m >= 0.0)) throw Error(Errc::InvalidArgument, "noise must be non-negative");
  if (!(p.min_separation_m >= 0.0)) throw Error(Errc::InvalidArgument, "separation must be >= 0");
  if (p.delta_ms <= 0) throw Error(Errc::InvalidDelta, "delta must be positive");
  if (!(p.sample_hz > 0.0) || 1000.0 / p.sample_hz < 1.0) {
    throw Error(Errc::InvalidArgument, "sample rate must be in (0, 1000] Hz");
  }
  if (!(p.area_side_m > 0.0) || p.area_side_m > std::min(p.room_width_m, p.room_depth_m)) {
    throw Error(Errc::InvalidArgument, "area side must fit the room");
  }

  detail::Rng rng(p.seed);
  Scenario sc;
  sc.params = p;
  const BBox room = make_bbox(0.0, 0.0, p.room_width_m, p.room_depth_m);

  std::vector<BBox> inner;
  for (int i = 0; i < p.n_sensors; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 10'000 && !placed; ++attempt) {
      const double x = rng.uniform(0.0, p.room_width_m - p.area_side_m);
      const double y = rng.uniform(0.0, p.room_depth_m - p.area_side_m);
      const BBox cand{{x, y}, {x + p.area_side_m, y + p.area_side_m}};
      placed = std::ranges::all_of(inner, [&](const BBox& b) {
        return detail::box_distance(cand, b) >= p.min_separation_m &&
               bbox_intersection_area(cand, b) == 0.0 && !(cand == b);
      });
      if (placed) inner.push_back(cand);
    }
    if (!placed) {
      throw Error(Errc::InfeasibleLayout, "cannot place " + std::to_string(p.n_sensors) +
                                              " areas with separation " +
                                              format_number(p.min_separation_m));
    }
    sc.layout.push_back(SensorModel{detail::sensor_name(i),
                                    {InteractionArea{inner.back(), 1.0, detail::sensor_name(i)},
                                     InteractionArea{room, 0.0, "other"}},
                                    detail::sensor_policy(i)});
  }

  const std::int64_t dt = static_cast<std::int64_t>(std::llround(1000.0 / p.sample_hz));
  const std::int64_t n_ticks = (p.duration_ms + dt - 1) / dt;
  const double step_m = p.walk_speed_mps * static_cast<double>(dt) / 1000.0;
  constexpr double kJitter = 0.05;

  struct Walker {
    Point pos;
    Point target;
    int station = -1;
    bool dwelling = false;
    std::int64_t dwell_until = 0;
    Point anchor;
  };

  auto random_point = [&](const BBox& b, double margin) {
    return Point{rng.uniform(b.min.x + margin, b.max.x - margin),
                 rng.uniform(b.min.y + margin, b.max.y - margin)};
  };
  auto pick_target = [&](Walker& w) {
    if (rng.uniform() < 0.7) {
      int next = static_cast<int>(rng.integer(0, p.n_sensors - 1));
      if (next == w.station && p.n_sensors > 1) next = (next + 1) % p.n_sensors;
      w.station = next;
      w.target = random_point(inner[next], 2.0 * kJitter);
    } else {
      w.station = -1;
      w.target = random_point(room, 0.0);
    }
    w.dwelling = false;
  };

  std::vector<Walker> walkers(p.n_users);
  for (auto& w : walkers) {
    w.pos = random_point(room, 0.0);
    pick_target(w);
  }

  std::vector<std::vector<Point>> true_pos(p.n_users, std::vector<Point>(n_ticks));
  std::vector<detail::Candidate> candidates;

  for (std::int64_t i = 0; i < n_ticks; ++i) {
    const std::int64_t t = i * dt;
    for (int u = 0; u < p.n_users; ++u) {
      Walker& w = walkers[u];
      if (w.dwelling) {
        if (t >= w.dwell_until) {
          pick_target(w);
        } else {
          const BBox& a = inner[w.station];
          w.pos = Point{std::clamp(w.anchor.x + rng.uniform(-kJitter, kJitter), a.min.x + kJitter,
                                   a.max.x - kJitter),
                        std::clamp(w.anchor.y + rng.uniform(-kJitter, kJitter), a.min.y + kJitter,
                                   a.max.y - kJitter)};
        }
      }
      if (!w.dwelling) {
        const double dx = w.target.x - w.pos.x;
        const double dy = w.target.y - w.pos.y;
        const double dist = std::hypot(dx, dy);
        if (dist <= step_m) {
          w.pos = w.target;
          if (w.station >= 0) {
            w.dwelling = true;
            w.anchor = w.pos;
            w.dwell_until = t + rng.integer(20'000, 60'000);
            std::int64_t open = t + rng.integer(1'000, 3'000);
            const int uses = static_cast<int>(rng.integer(1, 2));
            for (int k = 0; k < uses && open < w.dwell_until - 1'000; ++k) {
              const std::int64_t close =
                  std::min(open + rng.integer(2'000, 8'000), w.dwell_until - 500);
              candidates.push_back({w.station, open, 1.0, u});
              candidates.push_back({w.station, close, 0.0, u});
              open = close + rng.integer(1'000, 5'000);
            }
          } else {
            pick_target(w);
          }
        } else {
          w.pos = Point{w.pos.x + dx / dist * step_m, w.pos.y + dy / dist * step_m};
        }
      }
      true_pos[u][i] = w.pos;
    }
    if (p.untracked_events_per_min > 0.0 &&
        rng.uniform() < p.untracked_events_per_min * static_cast<double>(dt) / 60'000.0) {
      const int s = static_cast<int>(rng.integer(0, p.n_sensors - 1));
      candidates.push_back({s, t + 1, 1.0, -1});
      candidates.push_back({s, t + 1 + rng.integer(2'000, 8'000), 0.0, -1});
    }
  }

  // True per-window boxes on the grid anchored at t = 0.
  const std::int64_t n_windows = (n_ticks * dt) / p.delta_ms + 2;
  std::vector<std::vector<std::optional<BBox>>> window_box(
      p.n_users, std::vector<std::optional<BBox>>(n_windows));
  for (int u = 0; u < p.n_users; ++u) {
    for (std::int64_t i = 0; i < n_ticks; ++i) {
      auto& b = window_box[u][(i * dt) / p.delta_ms];
      if (b) {
        b->expand(true_pos[u][i]);
      } else {
        b = BBox::around(true_pos[u][i]);
      }
    }
  }

  for (const auto& c : candidates) {
    if (c.t >= n_ticks * dt) continue;
    const std::int64_t k = c.t / p.delta_ms;
    const bool clear = std::ranges::all_of(std::views::iota(0, p.n_users), [&](int v) {
      if (v == c.actor) return true;
      const auto& b = window_box[v][k];
      return !b || detail::box_distance(*b, inner[c.sensor]) >= p.min_separation_m;
    });
    if (!clear) continue;
    const std::string actor = c.actor < 0 ? std::string(kOthers) : detail::user_name(c.actor);
    const std::string& sid = sc.layout[c.sensor].sensor_id;
    if (sc.truth.emplace(TruthKey{sid, Timestamp{c.t}}, actor).second) {
      sc.sensors.push_back(SensorSample{sid, c.value, Timestamp{c.t}});
    }
  }
  std::ranges::sort(sc.sensors, {}, [](const SensorSample& s) { return std::tie(s.t, s.sensor_id); });

  for (std::int64_t i = 0; i < n_ticks; ++i) {
    for (int u = 0; u < p.n_users; ++u) {
      Point q = true_pos[u][i];
      if (p.noise_m > 0.0) {
        const double r = p.noise_m * std::sqrt(rng.uniform());
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        q = Point{q.x + r * std::cos(theta), q.y + r * std::sin(theta)};
      }
      sc.locations.push_back(LocationSample{detail::user_name(u), q, Timestamp{i * dt}});
    }
  }
  return sc;
}

/// Reference attribution that materialises every window and rescans the raw
/// samples for it. Shares no code with the segmentation/interaction path.
inline std::vector<AttributionRecord> oracle_attribute(
    const Scenario& sc, std::int64_t delta_ms,
    Aggregator agg = Aggregator::LukasiewiczTConorm) {
  if (delta_ms <= 0) throw Error(Errc::InvalidDelta, "delta must be positive");
  std::vector<AttributionRecord> out;
  if (sc.sensors.empty() && sc.locations.empty()) return out;

  std::int64_t t_min = INT64_MAX;
  std::int64_t t_max = INT64_MIN;
  for (const auto& s : sc.sensors) {
    t_min = std::min(t_min, s.t.epoch_ms);
    t_max = std::max(t_max, s.t.epoch_ms);
  }
  for (const auto& l : sc.locations) {
    t_min = std::min(t_min, l.t.epoch_ms);
    t_max = std::max(t_max, l.t.epoch_ms);
  }
  const std::int64_t origin = (t_min / delta_ms) * delta_ms;
  const std::int64_t last = (t_max - origin) / delta_ms;

  std::set<std::string> users;
  for (const auto& l : sc.locations) users.insert(l.user_id);
  std::vector<const SensorModel*> models;
  for (const auto& m : sc.layout) models.push_back(&m);
  std::ranges::sort(models, {}, &SensorModel::sensor_id);

  for (std::int64_t k = 0; k <= last; ++k) {
    const std::int64_t lo = origin + k * delta_ms;
    const std::int64_t hi = lo + delta_ms;
    auto in_window = [&](Timestamp t) { return t.epoch_ms >= lo && t.epoch_ms < hi; };

    std::map<std::string, std::array<double, 4>> boxes;  // xmin, ymin, xmax, ymax
    for (const auto& l : sc.locations) {
      if (!in_window(l.t)) continue;
      auto [it, fresh] = boxes.try_emplace(
          l.user_id, std::array<double, 4>{l.point.x, l.point.y, l.point.x, l.point.y});
      if (!fresh) {
        auto& b = it->second;
        b[0] = std::min(b[0], l.point.x);
        b[1] = std::min(b[1], l.point.y);
        b[2] = std::max(b[2], l.point.x);
        b[3] = std::max(b[3], l.point.y);
      }
    }

    for (const SensorModel* m : models) {
      bool any = false;
      double activation = 0.0;
      for (const auto& s : sc.sensors) {
        if (s.sensor_id != m->sensor_id || !in_window(s.t)) continue;
        activation = any ? std::max(activation, s.value) : s.value;
        any = true;
      }
      if (!any || activation <= 0.0) continue;

      std::map<std::string, double> raw;
      for (const auto& u : users) {
        auto it = boxes.find(u);
        if (it == boxes.end()) {
          raw[u] = 0.0;
          continue;
        }
        const auto& ub = it->second;
        double acc = 0.0;
        for (std::size_t j = 0; j < m->areas.size(); ++j) {
          const auto& ab = m->areas[j].box;
          const double user_area = (ub[2] - ub[0]) * (ub[3] - ub[1]);
          double overlap_ratio;
          if (user_area <= 0.0) {
            const bool inside = ab.min.x <= ub[0] && ub[2] <= ab.max.x && ab.min.y <= ub[1] &&
                                ub[3] <= ab.max.y;
            overlap_ratio = inside ? 1.0 : 0.0;
          } else {
            const double w = std::min(ab.max.x, ub[2]) - std::max(ab.min.x, ub[0]);
            const double h = std::min(ab.max.y, ub[3]) - std::max(ab.min.y, ub[1]);
            const double overlap = (w > 0.0 && h > 0.0) ? w * h : 0.0;
            overlap_ratio = std::min(1.0, overlap / user_area);
          }
          const double term = m->areas[j].degree * overlap_ratio;
          if (agg == Aggregator::Max) {
            acc = std::max(acc, term);
          } else if (agg == Aggregator::PaperLiteral) {
            acc = j == 0 ? term : std::min(1.0, 1.0 - acc + term);
          } else {
            acc = std::min(1.0, acc + term);
          }
        }
        raw[u] = acc;
      }

      double best = 0.0;
      std::string owner(kOthers);
      int at_best = 0;
      for (const auto& [u, d] : raw) {
        if (d > best) {
          best = d;
          owner = u;
          at_best = 1;
        } else if (d == best && d > 0.0) {
          ++at_best;
        }
      }
      AttributionRecord rec;
      rec.step = k;
      rec.sensor_id = m->sensor_id;
      rec.policy = m->policy;
      rec.activation = activation;
      rec.owner = owner;
      rec.tie = at_best > 1;
      for (const auto& [u, d] : raw) {
        rec.degrees[u] = (m->policy == Policy::Multiple || u == owner) ? d : 0.0;
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

struct SensorScore {
  std::map<std::string, std::map<std::string, std::size_t>> confusion;  // truth -> owner -> n
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t excluded = 0;  // collided windows dropped in strict mode
};

struct ScoreReport {
  std::map<std::string, SensorScore> sensors;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 1.0;  // vacuously 1 with no scored records
};

/// Scores owners against truth. A window's truth is the actor of its earliest
/// raw event; `strict` drops windows whose events involve several actors.
inline ScoreReport score(const std::vector<AttributionRecord>& records, const Truth& truth,
                         const Grid& grid, bool strict = false) {
  struct WindowTruth {
    std::int64_t first_t = INT64_MAX;
    std::string actor;
    std::set<std::string> actors;
  };
  std::map<std::pair<std::string, StepIndex>, WindowTruth> windows;
  for (const auto& [key, actor] : truth) {
    auto& w = windows[{key.sensor_id, grid.step_of(key.t)}];
    w.actors.insert(actor);
    if (key.t.epoch_ms < w.first_t) {
      w.first_t = key.t.epoch_ms;
      w.actor = actor;
    }
  }

  ScoreReport rep;
  for (const auto& rec : records) {
    auto it = windows.find({rec.sensor_id, rec.step});
    if (it == windows.end()) {
      throw Error(Errc::UnknownSensor, "no truth for sensor '" + rec.sensor_id + "' at step " +
                                           std::to_string(rec.step));
    }
    auto& s = rep.sensors[rec.sensor_id];
    if (strict && it->second.actors.size() > 1) {
      ++s.excluded;
      continue;
    }
    ++s.confusion[it->second.actor][rec.owner];
    ++s.total;
    ++rep.total;
    if (rec.owner == it->second.actor) {
      ++s.correct;
      ++rep.correct;
    }
  }
  if (rep.total > 0) {
    rep.accuracy = static_cast<double>(rep.correct) / static_cast<double>(rep.total);
  }
  return rep;
}

inline void emit_truth_csv(std::ostream& out, const Truth& truth) {
  out << "sensor_id,epoch_ms,actor\n";
  for (const auto& [key, actor] : truth) {
    out << key.sensor_id << ',' << key.t.epoch_ms << ',' << actor << '\n';
  }
}

inline Truth parse_truth_csv(std::istream& in) {
  Truth out;
  detail::read_csv(in, "sensor_id,epoch_ms,actor",
                   [&](const std::vector<std::string_view>& f, std::size_t n) {
                     if (f.size() != 3 || f[0].empty() || f[2].empty()) {
                       throw Error(Errc::MalformedRow,
                                   "line " + std::to_string(n) + ": expected 3 fields", n);
                     }
                     out.emplace(TruthKey{std::string(f[0]), detail::to_timestamp(f[1], n)},
                                 std::string(f[2]));
                   });
  return out;
}

/// Writes locations.csv, sensors.csv, truth.csv and areas.json into `dir`.
inline void export_scenario(const Scenario& sc, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(Errc::InvalidArgument, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("locations.csv");
    emit_location_csv(out, sc.locations);
  }
  {
    auto out = open("sensors.csv");
    emit_sensor_csv(out, sc.sensors);
  }
  {
    auto out = open("truth.csv");
    emit_truth_csv(out, sc.truth);
  }
  {
    auto out = open("areas.json");
    out << area_config_to_json(AreaConfig{1, sc.params.delta_ms, sc.layout}).dump(2) << '\n';
  }
}

inline Scenario import_scenario(const std::filesystem::path& dir) {
  Scenario sc;
  const AreaConfig cfg = load_area_config((dir / "areas.json").string());
  sc.params.delta_ms = cfg.delta_ms;
  sc.layout = cfg.sensors;
  sc.locations = parse_location_csv((dir / "locations.csv").string());
  sc.sensors = parse_sensor_csv((dir / "sensors.csv").string());
  auto in = detail::open_input((dir / "truth.csv").string());
  sc.truth = parse_truth_csv(in);
  return sc;
}

}  // namespace proxattr
