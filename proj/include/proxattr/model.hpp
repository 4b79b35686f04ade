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

// Shared domain types and axis-aligned 2D geometry.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "proxattr/error.hpp"

namespace proxattr {

/// Milliseconds since the Unix epoch.
struct Timestamp {
  std::int64_t epoch_ms = 0;

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const Point&, const Point&) = default;
};

struct SensorSample {
  std::string sensor_id;
  double value = 0.0;  // in [0, 1]
  Timestamp t;

  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

struct LocationSample {
  std::string user_id;
  Point point;
  Timestamp t;

  friend bool operator==(const LocationSample&, const LocationSample&) = default;
};

/// Closed axis-aligned box. Zero width and/or height is allowed.
struct BBox {
  Point min;
  Point max;

  constexpr bool valid() const noexcept {
    return min.x <= max.x && min.y <= max.y;
  }

  static BBox around(Point p) noexcept { return {p, p}; }

  /// Grows the box to cover `p`.
  void expand(Point p) noexcept {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
  }

  friend constexpr bool operator==(const BBox&, const BBox&) = default;
};

inline BBox make_bbox(double x_min, double y_min, double x_max, double y_max) {
  BBox box{{x_min, y_min}, {x_max, y_max}};
  if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_max) || !box.valid()) {
    throw Error(Errc::InvalidBox, "box requires finite coordinates with min <= max");
  }
  return box;
}

inline double bbox_area(const BBox& a) noexcept {
  return (a.max.x - a.min.x) * (a.max.y - a.min.y);
}

/// Overlap area of two boxes; 0 when disjoint or only touching.
inline double bbox_intersection_area(const BBox& a, const BBox& b) noexcept {
  const double w = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
  const double h = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

inline bool bbox_contains_point(const BBox& a, Point p) noexcept {
  return a.min.x <= p.x && p.x <= a.max.x && a.min.y <= p.y && p.y <= a.max.y;
}

inline bool bbox_contains(const BBox& outer, const BBox& inner) noexcept {
  return bbox_contains_point(outer, inner.min) && bbox_contains_point(outer, inner.max);
}

struct InteractionArea {
  BBox box;
  double degree = 1.0;  // mu in [0, 1]
  std::string label;

  friend bool operator==(const InteractionArea&, const InteractionArea&) = default;
};

enum class Policy { Multiple, Exclusive };

constexpr std::string_view to_string(Policy p) noexcept {
  return p == Policy::Multiple ? "multiple" : "exclusive";
}

struct SensorModel {
  std::string sensor_id;
  std::vector<InteractionArea> areas;  // non-empty, order matters for PaperLiteral
  Policy policy = Policy::Multiple;

  friend bool operator==(const SensorModel&, const SensorModel&) = default;
};

/// Throws if the model breaks its invariants.
inline void validate(const SensorModel& model) {
  if (model.sensor_id.empty()) {
    throw Error(Errc::InvalidArgument, "sensor model without id");
  }
  if (model.areas.empty()) {
    throw Error(Errc::InvalidArgument, "sensor '" + model.sensor_id + "' has no interaction areas");
  }
  for (const auto& area : model.areas) {
    if (!area.box.valid()) {
      throw Error(Errc::InvalidBox, "area '" + area.label + "' of sensor '" + model.sensor_id + "'");
    }
    if (!(area.degree >= 0.0 && area.degree <= 1.0)) {
      throw Error(Errc::DegreeOutOfRange,
                  "area '" + area.label + "' of sensor '" + model.sensor_id + "'");
    }
  }
}

}  // namespace proxattr
