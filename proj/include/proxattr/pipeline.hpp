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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proxattr/discrimination.hpp"
#include "proxattr/interaction.hpp"
#include "proxattr/model.hpp"
#include "proxattr/segmentation.hpp"

namespace proxattr {

struct PipelineResult {
  Grid grid;
  std::map<std::string, SegmentedSensorStream> sensors;
  std::map<std::string, SegmentedLocationStream> locations;
  DegreeMatrix degrees;
  std::vector<AttributionRecord> records;
};

/// Segments both kinds of stream on one grid. Without an explicit origin the
/// grid is anchored at the earliest sample; no samples at all gives origin 0.
inline PipelineResult segment_streams(std::span<const SensorSample> sensors,
                                      std::span<const LocationSample> locations,
                                      std::int64_t delta_ms,
                                      std::optional<Timestamp> origin = std::nullopt) {
  PipelineResult out;
  if (!origin) {
    origin = (sensors.empty() && locations.empty())
                 ? Timestamp{0}
                 : common_origin(sensors, locations, delta_ms);
  }
  out.grid = make_grid(*origin, delta_ms);
  out.sensors = segment_sensors(sensors, out.grid);
  out.locations = segment_locations(locations, out.grid);
  return out;
}

/// Segmentation, degree matrix and attribution in one call.
inline PipelineResult run_pipeline(const std::vector<SensorModel>& models,
                                   std::span<const SensorSample> sensors,
                                   std::span<const LocationSample> locations,
                                   std::int64_t delta_ms, std::optional<Timestamp> origin = {},
                                   Aggregator agg = Aggregator::LukasiewiczTConorm) {
  for (const auto& m : models) validate(m);
  PipelineResult out = segment_streams(sensors, locations, delta_ms, origin);
  out.degrees = degree_matrix(models, out.locations, agg);
  out.records = discriminate(models, out.sensors, out.degrees);
  return out;
}

}  // namespace proxattr
