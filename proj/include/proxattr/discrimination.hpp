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

// Per-user attribution of activated sensor steps.

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "proxattr/error.hpp"
#include "proxattr/interaction.hpp"
#include "proxattr/model.hpp"
#include "proxattr/segmentation.hpp"

namespace proxattr {

/// Owner label for activations no tracked user can explain.
inline constexpr std::string_view kOthers = "others";

using UserDegrees = std::map<std::string, double>;

struct Ownership {
  std::string owner{kOthers};
  bool tie = false;  // several users shared the positive maximum

  friend bool operator==(const Ownership&, const Ownership&) = default;
};

/// Argmax over users. Degree 0 everywhere means nobody; equal maxima go to
/// the lexicographically smallest id (map order) and set `tie`.
inline Ownership owner_of(const UserDegrees& degrees) {
  Ownership out;
  double best = 0.0;
  for (const auto& [user, d] : degrees) {
    if (d > best) {
      best = d;
      out.owner = user;
      out.tie = false;
    } else if (d == best && best > 0.0) {
      out.tie = true;
    }
  }
  return out;
}

inline UserDegrees attribute_multiple(const UserDegrees& degrees) { return degrees; }

/// Only the argmax user keeps its degree.
inline UserDegrees attribute_exclusive(const UserDegrees& degrees) {
  const Ownership own = owner_of(degrees);
  UserDegrees out;
  for (const auto& [user, d] : degrees) out.emplace(user, user == own.owner ? d : 0.0);
  return out;
}

struct AttributionRecord {
  StepIndex step = 0;
  std::string sensor_id;
  Policy policy = Policy::Multiple;
  double activation = 0.0;  // in (0, 1]
  UserDegrees degrees;      // after the sensor's policy
  std::string owner{kOthers};
  bool tie = false;

  friend bool operator==(const AttributionRecord&, const AttributionRecord&) = default;
};

/// One record per activated (sensor, step), sorted by (step, sensor_id).
/// Ownership is always the argmax of the raw degrees, whatever the policy,
/// so owner counts partition the activated steps of each sensor.
inline std::vector<AttributionRecord> discriminate(
    const std::vector<SensorModel>& models,
    const std::map<std::string, SegmentedSensorStream>& sensors, const DegreeMatrix& matrix) {
  std::map<std::string_view, const SensorModel*> by_id;
  for (const auto& m : models) by_id.emplace(m.sensor_id, &m);
  for (const auto& user : matrix.users) {
    if (user == kOthers) {
      throw Error(Errc::InvalidArgument, "user id '" + user + "' is reserved");
    }
  }

  std::vector<AttributionRecord> out;
  for (const auto& [sensor_id, stream] : sensors) {
    auto model = by_id.find(sensor_id);
    if (model == by_id.end()) {
      throw Error(Errc::UnknownSensor, "no interaction areas configured for '" + sensor_id + "'");
    }
    if (matrix.grid && *matrix.grid != stream.grid) {
      throw Error(Errc::GridMismatch, "sensor '" + sensor_id + "' uses a different grid");
    }
    const Policy policy = model->second->policy;
    for (const auto& [step, activation] : stream.steps) {
      if (!(activation > 0.0)) continue;
      UserDegrees raw;
      for (const auto& user : matrix.users) raw.emplace(user, matrix.at(step, sensor_id, user));
      const Ownership own = owner_of(raw);
      out.push_back(AttributionRecord{
          step, sensor_id, policy, activation,
          policy == Policy::Exclusive ? attribute_exclusive(raw) : attribute_multiple(raw),
          own.owner, own.tie});
    }
  }
  std::ranges::stable_sort(out, {}, [](const AttributionRecord& r) {
    return std::tie(r.step, r.sensor_id);
  });
  return out;
}

}  // namespace proxattr
