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

// Count tables, timeline exports and their renderings.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "proxattr/discrimination.hpp"
#include "proxattr/error.hpp"
#include "proxattr/io.hpp"
#include "proxattr/segmentation.hpp"

namespace proxattr {

inline constexpr std::string_view kTotalRow = "Total";

/// One timeline line: an attributed activation as written to disk.
struct TimelineRow {
  std::int64_t step_start_ms = 0;
  std::string sensor_id;
  double activation = 0.0;
  UserDegrees degrees;
  std::string owner;

  friend bool operator==(const TimelineRow&, const TimelineRow&) = default;
};

inline std::vector<TimelineRow> to_timeline(std::span<const AttributionRecord> records,
                                            const Grid& grid) {
  std::vector<TimelineRow> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(TimelineRow{grid.step_start(r.step).epoch_ms, r.sensor_id, r.activation,
                              r.degrees, r.owner});
  }
  return out;
}

/// `step_start_ms,sensor_id,raw_activation,degree_<user>...,owner`. Users
/// are given explicitly so files with no records still carry the columns.
inline void emit_timeline_csv(std::ostream& out, std::span<const TimelineRow> rows,
                              const std::vector<std::string>& users) {
  out << "step_start_ms,sensor_id,raw_activation";
  for (const auto& u : users) out << ",degree_" << u;
  out << ",owner\n";
  for (const auto& r : rows) {
    out << r.step_start_ms << ',' << r.sensor_id << ',' << format_number(r.activation);
    for (const auto& u : users) {
      auto it = r.degrees.find(u);
      out << ',' << format_number(it == r.degrees.end() ? 0.0 : it->second);
    }
    out << ',' << r.owner << '\n';
  }
}

struct Timeline {
  std::vector<std::string> users;
  std::vector<TimelineRow> rows;
};

inline Timeline parse_timeline_csv(std::istream& in) {
  Timeline tl;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (!header) {
      if (f.size() < 4 || f[0] != "step_start_ms" || f[1] != "sensor_id" ||
          f[2] != "raw_activation" || f.back() != "owner") {
        throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": bad timeline header",
                    line_no);
      }
      for (std::size_t i = 3; i + 1 < f.size(); ++i) {
        if (!f[i].starts_with("degree_") || f[i].size() == 7) {
          throw Error(Errc::MalformedRow,
                      "line " + std::to_string(line_no) + ": bad column '" + std::string(f[i]) + "'",
                      line_no);
        }
        tl.users.emplace_back(f[i].substr(7));
      }
      header = true;
      continue;
    }
    if (f.size() != tl.users.size() + 4 || f[1].empty() || f.back().empty()) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": wrong field count",
                  line_no);
    }
    TimelineRow row;
    row.step_start_ms = detail::to_timestamp(f[0], line_no).epoch_ms;
    row.sensor_id = std::string(f[1]);
    const auto act = detail::to_double(f[2]);
    if (!act || !(*act > 0.0 && *act <= 1.0)) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": bad activation",
                  line_no);
    }
    row.activation = *act;
    for (std::size_t i = 0; i < tl.users.size(); ++i) {
      const auto d = detail::to_double(f[3 + i]);
      if (!d || !(*d >= 0.0 && *d <= 1.0)) {
        throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": bad degree",
                    line_no);
      }
      row.degrees.emplace(tl.users[i], *d);
    }
    row.owner = std::string(f.back());
    tl.rows.push_back(std::move(row));
  }
  return tl;
}

/// Owner counts per sensor. Rows are users, then `others`, then `Total`.
struct CountTable {
  std::vector<std::string> users;
  std::vector<std::string> sensors;
  std::map<std::string, std::map<std::string, std::size_t>> counts;

  std::vector<std::string> rows() const {
    std::vector<std::string> r = users;
    r.emplace_back(kOthers);
    r.emplace_back(kTotalRow);
    return r;
  }

  std::size_t at(const std::string& row, const std::string& sensor) const {
    auto r = counts.find(row);
    if (r == counts.end()) return 0;
    auto c = r->second.find(sensor);
    return c == r->second.end() ? 0 : c->second;
  }
};

template <typename Rows>
CountTable count_owners(const Rows& rows, std::vector<std::string> users = {}) {
  CountTable t;
  std::set<std::string> user_set(users.begin(), users.end());
  std::set<std::string> sensor_set;
  for (const auto& r : rows) {
    sensor_set.insert(r.sensor_id);
    for (const auto& [u, _] : r.degrees) user_set.insert(u);
    if (r.owner != kOthers) user_set.insert(r.owner);
    ++t.counts[r.owner][r.sensor_id];
    ++t.counts[std::string(kTotalRow)][r.sensor_id];
  }
  t.users.assign(user_set.begin(), user_set.end());
  t.sensors.assign(sensor_set.begin(), sensor_set.end());
  return t;
}

struct UserSummary {
  std::optional<std::string> top_sensor;  // none when the user owns nothing
  std::size_t top_count = 0;
};

/// Highest-count sensor per user (ties to the smaller sensor id).
inline std::map<std::string, UserSummary> summarize_users(const CountTable& t) {
  std::map<std::string, UserSummary> out;
  for (const auto& u : t.users) {
    UserSummary s;
    for (const auto& sensor : t.sensors) {
      const std::size_t n = t.at(u, sensor);
      if (n > s.top_count) {
        s.top_count = n;
        s.top_sensor = sensor;
      }
    }
    out.emplace(u, s);
  }
  return out;
}

/// Tracked user owning the most activations of each sensor, if any.
inline std::map<std::string, std::optional<std::string>> dominant_users(const CountTable& t) {
  std::map<std::string, std::optional<std::string>> out;
  for (const auto& sensor : t.sensors) {
    std::optional<std::string> best;
    std::size_t best_n = 0;
    for (const auto& u : t.users) {
      const std::size_t n = t.at(u, sensor);
      if (n > best_n) {
        best_n = n;
        best = u;
      }
    }
    out.emplace(sensor, best);
  }
  return out;
}

inline void render_table(std::ostream& out, const CountTable& t) {
  std::size_t first = std::string_view("inhabitant").size();
  for (const auto& r : t.rows()) first = std::max(first, r.size());
  out << std::left << std::setw(static_cast<int>(first)) << "inhabitant";
  for (const auto& s : t.sensors) out << "  " << std::right << std::setw(std::max<int>(6, s.size())) << s;
  out << '\n';
  for (const auto& r : t.rows()) {
    out << std::left << std::setw(static_cast<int>(first)) << r;
    for (const auto& s : t.sensors) {
      out << "  " << std::right << std::setw(std::max<int>(6, s.size())) << t.at(r, s);
    }
    out << '\n';
  }
  out << std::left;
}

inline void render_csv(std::ostream& out, const CountTable& t) {
  out << "row";
  for (const auto& s : t.sensors) out << ',' << s;
  out << '\n';
  for (const auto& r : t.rows()) {
    out << r;
    for (const auto& s : t.sensors) out << ',' << t.at(r, s);
    out << '\n';
  }
}

/// Stable JSON rendering; shape is described by docs/report.schema.json.
inline nlohmann::ordered_json report_json(const CountTable& t) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["sensors"] = t.sensors;
  j["users"] = t.users;
  auto& counts = j["counts"] = nlohmann::ordered_json::object();
  for (const auto& r : t.rows()) {
    auto& row = counts[r] = nlohmann::ordered_json::object();
    for (const auto& s : t.sensors) row[s] = t.at(r, s);
  }
  auto& summary = j["summary"] = nlohmann::ordered_json::object();
  for (const auto& [u, s] : summarize_users(t)) {
    nlohmann::ordered_json us;
    us["top_sensor"] = s.top_sensor ? nlohmann::ordered_json(*s.top_sensor) : nlohmann::ordered_json();
    us["top_count"] = s.top_count;
    auto& shares = us["shares"] = nlohmann::ordered_json::object();
    for (const auto& sensor : t.sensors) {
      const std::size_t n = t.at(u, sensor);
      const std::size_t total = t.at(std::string(kTotalRow), sensor);
      shares[sensor] = {{"count", n},
                        {"total", total},
                        {"share", total == 0 ? 0.0 : static_cast<double>(n) / total}};
    }
    summary[u] = std::move(us);
  }
  auto& dom = j["dominant_user"] = nlohmann::ordered_json::object();
  for (const auto& [sensor, u] : dominant_users(t)) {
    dom[sensor] = u ? nlohmann::ordered_json(*u) : nlohmann::ordered_json();
  }
  return j;
}

inline void render_summary(std::ostream& out, const CountTable& t) {
  for (const auto& [u, s] : summarize_users(t)) {
    out << u << ": ";
    if (!s.top_sensor) {
      out << "no attributed activations\n";
      continue;
    }
    out << "top sensor " << *s.top_sensor << " (" << s.top_count << ")";
    for (const auto& sensor : t.sensors) {
      out << ", " << sensor << ' ' << t.at(u, sensor) << '/' << t.at(std::string(kTotalRow), sensor);
    }
    out << '\n';
  }
  for (const auto& [sensor, u] : dominant_users(t)) {
    out << sensor << " mainly used by " << (u ? *u : std::string("nobody tracked")) << '\n';
  }
}

/// Raw and segmented instance counts per stream.
struct SegmentSummary {
  struct Counts {
    std::size_t raw = 0;
    std::size_t segmented = 0;
  };
  std::map<std::string, Counts> sensors;    // segmented = activated steps
  std::map<std::string, Counts> locations;  // segmented = non-empty steps
};

inline SegmentSummary summarize_segmentation(
    std::span<const SensorSample> raw_sensors, std::span<const LocationSample> raw_locations,
    const std::map<std::string, SegmentedSensorStream>& sensors,
    const std::map<std::string, SegmentedLocationStream>& locations) {
  SegmentSummary s;
  for (const auto& r : raw_sensors) ++s.sensors[r.sensor_id].raw;
  for (const auto& r : raw_locations) ++s.locations[r.user_id].raw;
  for (const auto& [id, st] : sensors) s.sensors[id].segmented = st.activated_count();
  for (const auto& [id, st] : locations) s.locations[id].segmented = st.steps.size();
  return s;
}

inline void render_segment_summary(std::ostream& out, const SegmentSummary& s,
                                   std::int64_t delta_ms) {
  std::vector<std::pair<std::string, SegmentSummary::Counts>> cols;
  for (const auto& c : s.sensors) cols.push_back(c);
  for (const auto& c : s.locations) cols.push_back(c);
  const std::string seg_label = "segmented(" + std::to_string(delta_ms) + "ms)";
  const int first = static_cast<int>(std::max<std::size_t>(seg_label.size(), 9));
  out << std::left << std::setw(first) << "instances";
  for (const auto& [name, _] : cols) out << "  " << std::right << std::setw(std::max<int>(7, name.size())) << name;
  out << '\n' << std::left << std::setw(first) << "raw";
  for (const auto& [name, c] : cols) out << "  " << std::right << std::setw(std::max<int>(7, name.size())) << c.raw;
  out << '\n' << std::left << std::setw(first) << seg_label;
  for (const auto& [name, c] : cols) {
    out << "  " << std::right << std::setw(std::max<int>(7, name.size())) << c.segmented;
  }
  out << '\n' << std::left;
  SegmentSummary::Counts sensor_total, location_total;
  for (const auto& [_, c] : s.sensors) {
    sensor_total.raw += c.raw;
    sensor_total.segmented += c.segmented;
  }
  for (const auto& [_, c] : s.locations) {
    location_total.raw += c.raw;
    location_total.segmented += c.segmented;
  }
  out << "sensor events: raw " << sensor_total.raw << ", activated steps "
      << sensor_total.segmented << "; location samples: raw " << location_total.raw
      << ", steps " << location_total.segmented << '\n';
}

}  // namespace proxattr
