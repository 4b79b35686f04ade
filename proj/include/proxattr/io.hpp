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

// File formats: location/sensor CSV, the JSON area configuration and the
// NDJSON replay feed.
//
//   location CSV   user_id,epoch_ms,x,y
//   sensor CSV     sensor_id,epoch_ms,value
//   replay NDJSON  {"kind":"sensor","sensor_id":..,"epoch_ms":..,"value":..}
//                  {"kind":"location","user_id":..,"epoch_ms":..,"x":..,"y":..}
//
// CSV is UTF-8, LF (CR tolerated on input), dot decimal, no quoting.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "proxattr/error.hpp"
#include "proxattr/model.hpp"
#include "proxattr/segmentation.hpp"

namespace proxattr {

inline constexpr std::string_view kLocationHeader = "user_id,epoch_ms,x,y";
inline constexpr std::string_view kSensorHeader = "sensor_id,epoch_ms,value";

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline Timestamp to_timestamp(std::string_view s, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    throw Error(Errc::BadTimestamp, "line " + std::to_string(line_no) + ": '" + std::string(s) + "'",
                line_no);
  }
  return Timestamp{v};
}

/// Calls `row(fields, line_no)` for each data line after checking the header.
/// A completely empty input has no header and yields no rows.
template <typename F>
void read_csv(std::istream& in, std::string_view header, F&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!seen_header) {
      if (line.empty()) continue;
      if (line != header) {
        throw Error(Errc::MalformedRow,
                    "line " + std::to_string(line_no) + ": expected header '" + std::string(header) + "'",
                    line_no);
      }
      seen_header = true;
      continue;
    }
    if (line.empty()) continue;
    row(split_csv(line), line_no);
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open '" + path + "'");
  return in;
}

}  // namespace detail

inline std::vector<LocationSample> parse_location_csv(std::istream& in) {
  std::vector<LocationSample> out;
  detail::read_csv(in, kLocationHeader, [&](const std::vector<std::string_view>& f, std::size_t n) {
    if (f.size() != 4 || f[0].empty()) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(n) + ": expected 4 fields", n);
    }
    const Timestamp t = detail::to_timestamp(f[1], n);
    const auto x = detail::to_double(f[2]);
    const auto y = detail::to_double(f[3]);
    if (!x || !y) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(n) + ": bad coordinate", n);
    }
    if (!std::isfinite(*x) || !std::isfinite(*y)) {
      throw Error(Errc::NonFiniteCoordinate, "line " + std::to_string(n), n);
    }
    out.push_back(LocationSample{std::string(f[0]), Point{*x, *y}, t});
  });
  return out;
}

inline std::vector<LocationSample> parse_location_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_location_csv(in);
}

/// Maps a textual activation to [0,1]. Accepts numbers and the usual binary
/// state words (on/off, true/false, open/closed).
inline std::optional<double> coerce_activation(std::string_view s) {
  if (s == "on" || s == "true" || s == "open") return 1.0;
  if (s == "off" || s == "false" || s == "closed") return 0.0;
  return detail::to_double(s);
}

inline std::vector<SensorSample> parse_sensor_csv(std::istream& in) {
  std::vector<SensorSample> out;
  detail::read_csv(in, kSensorHeader, [&](const std::vector<std::string_view>& f, std::size_t n) {
    if (f.size() != 3 || f[0].empty()) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(n) + ": expected 3 fields", n);
    }
    const Timestamp t = detail::to_timestamp(f[1], n);
    const auto v = coerce_activation(f[2]);
    if (!v) throw Error(Errc::MalformedRow, "line " + std::to_string(n) + ": bad value", n);
    if (!(*v >= 0.0 && *v <= 1.0)) {
      throw Error(Errc::ValueOutOfRange, "line " + std::to_string(n) + ": " + std::string(f[2]), n);
    }
    out.push_back(SensorSample{std::string(f[0]), *v, t});
  });
  return out;
}

inline std::vector<SensorSample> parse_sensor_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return parse_sensor_csv(in);
}

inline void emit_location_csv(std::ostream& out, std::span<const LocationSample> samples) {
  out << kLocationHeader << '\n';
  for (const auto& s : samples) {
    out << s.user_id << ',' << s.t.epoch_ms << ',' << format_number(s.point.x) << ','
        << format_number(s.point.y) << '\n';
  }
}

inline void emit_sensor_csv(std::ostream& out, std::span<const SensorSample> samples) {
  out << kSensorHeader << '\n';
  for (const auto& s : samples) {
    out << s.sensor_id << ',' << s.t.epoch_ms << ',' << format_number(s.value) << '\n';
  }
}

inline void emit_segmented_sensors(std::ostream& out,
                                   const std::map<std::string, SegmentedSensorStream>& streams) {
  out << "sensor_id,step,step_start_ms,value\n";
  for (const auto& [id, s] : streams) {
    for (const auto& [k, v] : s.steps) {
      out << id << ',' << k << ',' << s.grid.step_start(k).epoch_ms << ',' << format_number(v)
          << '\n';
    }
  }
}

inline void emit_segmented_locations(std::ostream& out,
                                     const std::map<std::string, SegmentedLocationStream>& streams) {
  out << "user_id,step,step_start_ms,x_min,y_min,x_max,y_max\n";
  for (const auto& [id, s] : streams) {
    for (const auto& [k, b] : s.steps) {
      out << id << ',' << k << ',' << s.grid.step_start(k).epoch_ms << ','
          << format_number(b.min.x) << ',' << format_number(b.min.y) << ','
          << format_number(b.max.x) << ',' << format_number(b.max.y) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Area configuration

inline constexpr std::int64_t kDefaultDeltaMs = 15000;

struct AreaConfig {
  int version = 1;
  std::int64_t delta_ms = kDefaultDeltaMs;
  std::vector<SensorModel> sensors;

  friend bool operator==(const AreaConfig&, const AreaConfig&) = default;
};

namespace detail {

inline void only_keys(const nlohmann::json& obj, const std::string& path,
                      std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw Error(Errc::SchemaError, path + ": expected object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(Errc::SchemaError, path + "." + key + ": unknown field");
    }
  }
}

inline const nlohmann::json& required(const nlohmann::json& obj, const std::string& path,
                                      const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::SchemaError, path + "." + key + ": missing");
  return *it;
}

inline double number_at(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw Error(Errc::SchemaError, path + ": expected number");
  return v.get<double>();
}

inline std::string string_at(const nlohmann::json& v, const std::string& path) {
  if (!v.is_string()) throw Error(Errc::SchemaError, path + ": expected string");
  return v.get<std::string>();
}

}  // namespace detail

/// Validates and converts a parsed configuration document. Errors name the
/// offending field path, e.g. `$.sensors[0].areas[1].degree`.
inline AreaConfig area_config_from_json(const nlohmann::json& doc) {
  using detail::required;
  detail::only_keys(doc, "$", {"version", "delta_ms", "sensors"});
  AreaConfig cfg;

  const auto& version = required(doc, "$", "version");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw Error(Errc::SchemaError, "$.version: expected 1");
  }
  if (auto it = doc.find("delta_ms"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() <= 0) {
      throw Error(Errc::SchemaError, "$.delta_ms: expected positive integer");
    }
    cfg.delta_ms = it->get<std::int64_t>();
  }

  const auto& sensors = required(doc, "$", "sensors");
  if (!sensors.is_array()) throw Error(Errc::SchemaError, "$.sensors: expected array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const std::string sp = "$.sensors[" + std::to_string(i) + "]";
    const auto& js = sensors[i];
    detail::only_keys(js, sp, {"sensor_id", "policy", "areas"});
    SensorModel model;
    model.sensor_id = detail::string_at(required(js, sp, "sensor_id"), sp + ".sensor_id");
    if (model.sensor_id.empty() || model.sensor_id.find(',') != std::string::npos) {
      throw Error(Errc::SchemaError, sp + ".sensor_id: must be non-empty without commas");
    }
    if (!seen.insert(model.sensor_id).second) {
      throw Error(Errc::SchemaError, sp + ".sensor_id: duplicate '" + model.sensor_id + "'");
    }
    const auto policy = detail::string_at(required(js, sp, "policy"), sp + ".policy");
    if (policy == "multiple") {
      model.policy = Policy::Multiple;
    } else if (policy == "exclusive") {
      model.policy = Policy::Exclusive;
    } else {
      throw Error(Errc::SchemaError, sp + ".policy: expected 'multiple' or 'exclusive'");
    }
    const auto& areas = required(js, sp, "areas");
    if (!areas.is_array() || areas.empty()) {
      throw Error(Errc::SchemaError, sp + ".areas: expected non-empty array");
    }
    for (std::size_t j = 0; j < areas.size(); ++j) {
      const std::string ap = sp + ".areas[" + std::to_string(j) + "]";
      const auto& ja = areas[j];
      detail::only_keys(ja, ap, {"label", "box", "degree"});
      InteractionArea area;
      area.label = detail::string_at(required(ja, ap, "label"), ap + ".label");
      const auto& box = required(ja, ap, "box");
      if (!box.is_array() || box.size() != 4) {
        throw Error(Errc::SchemaError, ap + ".box: expected [x_min, y_min, x_max, y_max]");
      }
      double c[4];
      for (std::size_t k = 0; k < 4; ++k) {
        c[k] = detail::number_at(box[k], ap + ".box[" + std::to_string(k) + "]");
      }
      if (!(c[0] <= c[2] && c[1] <= c[3])) {
        throw Error(Errc::InvalidBox, ap + ".box: min corner exceeds max corner");
      }
      area.box = make_bbox(c[0], c[1], c[2], c[3]);
      area.degree = detail::number_at(required(ja, ap, "degree"), ap + ".degree");
      if (!(area.degree >= 0.0 && area.degree <= 1.0)) {
        throw Error(Errc::DegreeOutOfRange, ap + ".degree: " + format_number(area.degree));
      }
      model.areas.push_back(std::move(area));
    }
    cfg.sensors.push_back(std::move(model));
  }
  return cfg;
}

inline AreaConfig parse_area_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::SchemaError, std::string("$: invalid JSON: ") + e.what());
  }
  return area_config_from_json(doc);
}

inline AreaConfig load_area_config(const std::string& path) {
  auto in = detail::open_input(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_area_config(buf.str());
}

inline nlohmann::ordered_json area_config_to_json(const AreaConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["version"] = cfg.version;
  doc["delta_ms"] = cfg.delta_ms;
  doc["sensors"] = nlohmann::ordered_json::array();
  for (const auto& m : cfg.sensors) {
    nlohmann::ordered_json js;
    js["sensor_id"] = m.sensor_id;
    js["policy"] = std::string(to_string(m.policy));
    js["areas"] = nlohmann::ordered_json::array();
    for (const auto& a : m.areas) {
      js["areas"].push_back({{"label", a.label},
                             {"box", {a.box.min.x, a.box.min.y, a.box.max.x, a.box.max.y}},
                             {"degree", a.degree}});
    }
    doc["sensors"].push_back(std::move(js));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// NDJSON replay

using RawRecord = std::variant<SensorSample, LocationSample>;

inline std::string to_ndjson(const RawRecord& rec) {
  nlohmann::ordered_json j;
  if (const auto* s = std::get_if<SensorSample>(&rec)) {
    j["kind"] = "sensor";
    j["sensor_id"] = s->sensor_id;
    j["epoch_ms"] = s->t.epoch_ms;
    j["value"] = s->value;
  } else {
    const auto& l = std::get<LocationSample>(rec);
    j["kind"] = "location";
    j["user_id"] = l.user_id;
    j["epoch_ms"] = l.t.epoch_ms;
    j["x"] = l.point.x;
    j["y"] = l.point.y;
  }
  return j.dump();
}

inline RawRecord parse_ndjson_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  if (!j.is_object()) throw Error(Errc::ParseError, "expected a JSON object");
  auto str = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
      throw Error(Errc::ParseError, std::string("missing string field '") + key + "'");
    }
    return it->get<std::string>();
  };
  auto num = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) {
      throw Error(Errc::ParseError, std::string("missing numeric field '") + key + "'");
    }
    return it->get<double>();
  };
  auto ts = [&] {
    auto it = j.find("epoch_ms");
    if (it == j.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw Error(Errc::ParseError, "epoch_ms must be a non-negative integer");
    }
    return Timestamp{it->get<std::int64_t>()};
  };
  const std::string kind = str("kind");
  if (kind == "sensor") {
    detail::only_keys(j, "$", {"kind", "sensor_id", "epoch_ms", "value"});
    SensorSample s{str("sensor_id"), num("value"), ts()};
    if (!(s.value >= 0.0 && s.value <= 1.0)) throw Error(Errc::ParseError, "value outside [0,1]");
    return s;
  }
  if (kind == "location") {
    detail::only_keys(j, "$", {"kind", "user_id", "epoch_ms", "x", "y"});
    LocationSample l{str("user_id"), Point{num("x"), num("y")}, ts()};
    return l;
  }
  throw Error(Errc::ParseError, "unknown kind '" + kind + "'");
}

/// Pull-style reader over an NDJSON stream. Bad or blank lines are skipped
/// and counted; parse failures are kept for reporting.
class ReplayReader {
 public:
  struct LineError {
    std::size_t line = 0;
    std::string message;
  };

  explicit ReplayReader(std::istream& in) : in_(in) {}

  std::optional<RawRecord> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) {
        ++skipped_;
        continue;
      }
      try {
        return parse_ndjson_line(line);
      } catch (const Error& e) {
        ++skipped_;
        errors_.push_back(LineError{line_no_, e.what()});
      }
    }
    return std::nullopt;
  }

  std::size_t skipped() const noexcept { return skipped_; }
  const std::vector<LineError>& errors() const noexcept { return errors_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
  std::size_t skipped_ = 0;
  std::vector<LineError> errors_;
};

}  // namespace proxattr
