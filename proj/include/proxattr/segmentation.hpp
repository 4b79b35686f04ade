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

// Tumbling-window segmentation of raw streams onto a shared step grid.
// Sensor windows aggregate with max, location windows with a bounding box.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ranges>
#include <span>
#include <string>

#include "proxattr/error.hpp"
#include "proxattr/model.hpp"

namespace proxattr {

using StepIndex = std::int64_t;

/// Window k covers [origin + k*delta, origin + (k+1)*delta).
struct Grid {
  Timestamp origin;
  std::int64_t delta_ms = 0;

  StepIndex step_of(Timestamp t) const noexcept {
    const std::int64_t offset = t.epoch_ms - origin.epoch_ms;
    StepIndex k = offset / delta_ms;
    if (offset % delta_ms != 0 && offset < 0) --k;
    return k;
  }

  Timestamp step_start(StepIndex k) const noexcept {
    return Timestamp{origin.epoch_ms + k * delta_ms};
  }

  friend constexpr bool operator==(const Grid&, const Grid&) = default;
};

inline Grid make_grid(Timestamp origin, std::int64_t delta_ms) {
  if (delta_ms <= 0) {
    throw Error(Errc::InvalidDelta, "delta must be positive, got " + std::to_string(delta_ms));
  }
  return Grid{origin, delta_ms};
}

struct SegmentedSensorStream {
  std::string sensor_id;
  Grid grid;
  std::map<StepIndex, double> steps;  // only non-empty windows

  /// Steps whose aggregated activation is positive.
  std::size_t activated_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [k, v] : steps) n += v > 0.0 ? 1 : 0;
    return n;
  }

  friend bool operator==(const SegmentedSensorStream&, const SegmentedSensorStream&) = default;
};

struct SegmentedLocationStream {
  std::string user_id;
  Grid grid;
  std::map<StepIndex, BBox> steps;

  friend bool operator==(const SegmentedLocationStream&, const SegmentedLocationStream&) = default;
};

/// Incremental max-aggregation of one sensor's samples. Arrival order is free.
class SensorSegmenter {
 public:
  SensorSegmenter(std::string sensor_id, Grid grid) {
    out_.sensor_id = std::move(sensor_id);
    out_.grid = make_grid(grid.origin, grid.delta_ms);
  }

  void add(const SensorSample& s) {
    if (s.sensor_id != out_.sensor_id) {
      throw Error(Errc::InvalidArgument,
                  "sample for '" + s.sensor_id + "' fed to segmenter of '" + out_.sensor_id + "'");
    }
    const StepIndex k = out_.grid.step_of(s.t);
    auto [it, inserted] = out_.steps.try_emplace(k, s.value);
    if (!inserted && s.value > it->second) it->second = s.value;
  }

  const SegmentedSensorStream& current() const noexcept { return out_; }
  SegmentedSensorStream finish() && { return std::move(out_); }

 private:
  SegmentedSensorStream out_;
};

/// Incremental bounding-box aggregation of one user's locations.
class LocationSegmenter {
 public:
  LocationSegmenter(std::string user_id, Grid grid) {
    out_.user_id = std::move(user_id);
    out_.grid = make_grid(grid.origin, grid.delta_ms);
  }

  void add(const LocationSample& s) {
    if (s.user_id != out_.user_id) {
      throw Error(Errc::InvalidArgument,
                  "sample for '" + s.user_id + "' fed to segmenter of '" + out_.user_id + "'");
    }
    const StepIndex k = out_.grid.step_of(s.t);
    auto [it, inserted] = out_.steps.try_emplace(k, BBox::around(s.point));
    if (!inserted) it->second.expand(s.point);
  }

  const SegmentedLocationStream& current() const noexcept { return out_; }
  SegmentedLocationStream finish() && { return std::move(out_); }

 private:
  SegmentedLocationStream out_;
};

namespace detail {

template <typename R, typename T>
concept range_of = std::ranges::input_range<R> &&
                   std::same_as<std::remove_cvref_t<std::ranges::range_value_t<R>>, T>;

}  // namespace detail

/// Segments a single sensor's samples. All samples must carry the same id;
/// an empty range yields an empty stream with an empty id.
template <detail::range_of<SensorSample> R>
SegmentedSensorStream segment_binary(const R& samples, std::int64_t delta_ms, Timestamp origin) {
  const Grid grid = make_grid(origin, delta_ms);
  auto first = std::ranges::begin(samples);
  if (first == std::ranges::end(samples)) return SegmentedSensorStream{{}, grid, {}};
  SensorSegmenter seg(first->sensor_id, grid);
  for (const auto& s : samples) seg.add(s);
  return std::move(seg).finish();
}

template <detail::range_of<LocationSample> R>
SegmentedLocationStream segment_location(const R& samples, std::int64_t delta_ms,
                                         Timestamp origin) {
  const Grid grid = make_grid(origin, delta_ms);
  auto first = std::ranges::begin(samples);
  if (first == std::ranges::end(samples)) return SegmentedLocationStream{{}, grid, {}};
  LocationSegmenter seg(first->user_id, grid);
  for (const auto& s : samples) seg.add(s);
  return std::move(seg).finish();
}

/// Splits a mixed-id sample list by sensor and segments each one.
template <detail::range_of<SensorSample> R>
std::map<std::string, SegmentedSensorStream> segment_sensors(const R& samples, Grid grid) {
  std::map<std::string, SensorSegmenter> segs;
  for (const auto& s : samples) {
    auto it = segs.find(s.sensor_id);
    if (it == segs.end()) it = segs.try_emplace(s.sensor_id, s.sensor_id, grid).first;
    it->second.add(s);
  }
  std::map<std::string, SegmentedSensorStream> out;
  for (auto& [id, seg] : segs) out.emplace(id, std::move(seg).finish());
  return out;
}

template <detail::range_of<LocationSample> R>
std::map<std::string, SegmentedLocationStream> segment_locations(const R& samples, Grid grid) {
  std::map<std::string, LocationSegmenter> segs;
  for (const auto& s : samples) {
    auto it = segs.find(s.user_id);
    if (it == segs.end()) it = segs.try_emplace(s.user_id, s.user_id, grid).first;
    it->second.add(s);
  }
  std::map<std::string, SegmentedLocationStream> out;
  for (auto& [id, seg] : segs) out.emplace(id, std::move(seg).finish());
  return out;
}

/// Window origin shared by every stream: the earliest timestamp rounded down
/// to a multiple of delta.
inline Timestamp common_origin(std::span<const SensorSample> sensors,
                               std::span<const LocationSample> locations,
                               std::int64_t delta_ms) {
  if (delta_ms <= 0) {
    throw Error(Errc::InvalidDelta, "delta must be positive, got " + std::to_string(delta_ms));
  }
  std::optional<std::int64_t> min_t;
  auto see = [&](std::int64_t t) { min_t = min_t ? std::min(*min_t, t) : t; };
  for (const auto& s : sensors) see(s.t.epoch_ms);
  for (const auto& s : locations) see(s.t.epoch_ms);
  if (!min_t) throw Error(Errc::NoData, "no samples to anchor the window grid");
  const Grid epoch_grid{Timestamp{0}, delta_ms};
  return epoch_grid.step_start(epoch_grid.step_of(Timestamp{*min_t}));
}

}  // namespace proxattr
