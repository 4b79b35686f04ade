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

// Fuzzy interaction degree between a sensor's weighted areas and a user's
// per-step bounding box.

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <ranges>
#include <string>
#include <string_view>
#include <vector>

#include "proxattr/error.hpp"
#include "proxattr/model.hpp"
#include "proxattr/segmentation.hpp"

namespace proxattr {

/// How per-area terms are merged into one sensor degree.
///
/// LukasiewiczTConorm folds with min(1, acc + term) from 0 and is the default.
/// PaperLiteral folds min(1, 1 - acc + term) left to right, seeded with the
/// first term; this is the Lukasiewicz implication, so it is order-sensitive
/// and can report 1 when every term is 0. Max takes the largest term.
enum class Aggregator { LukasiewiczTConorm, PaperLiteral, Max };

constexpr std::string_view to_string(Aggregator a) noexcept {
  switch (a) {
    case Aggregator::LukasiewiczTConorm: return "lukasiewicz-tconorm";
    case Aggregator::PaperLiteral: return "paper-literal";
    case Aggregator::Max: return "max";
  }
  return "unknown";
}

inline Aggregator parse_aggregator(std::string_view name) {
  for (auto a : {Aggregator::LukasiewiczTConorm, Aggregator::PaperLiteral, Aggregator::Max}) {
    if (name == to_string(a)) return a;
  }
  throw Error(Errc::InvalidArgument, "unknown aggregator '" + std::string(name) + "'");
}

/// Overlap with the area divided by the user box area. A zero-area user box
/// (a point or a segment) scores 1 if it lies inside the area, else 0.
inline double jaccard_user(const InteractionArea& area, const BBox& user_box) noexcept {
  const double user_area = bbox_area(user_box);
  if (user_area <= 0.0) return bbox_contains(area.box, user_box) ? 1.0 : 0.0;
  return std::min(1.0, bbox_intersection_area(area.box, user_box) / user_area);
}

/// Product t-norm of the area degree and the user-relative overlap.
inline double area_term(const InteractionArea& area, const BBox& user_box) noexcept {
  return area.degree * jaccard_user(area, user_box);
}

inline double tconorm_lukasiewicz(double a, double b) noexcept { return std::min(1.0, a + b); }
inline double implication_lukasiewicz(double a, double b) noexcept {
  return std::min(1.0, 1.0 - a + b);
}

/// Folds terms in [0,1] into one degree in [0,1]. An empty range gives 0.
template <std::ranges::input_range R>
  requires std::convertible_to<std::ranges::range_value_t<R>, double>
double aggregate(R&& terms, Aggregator agg) {
  double acc = 0.0;
  bool first = true;
  for (double term : terms) {
    switch (agg) {
      case Aggregator::LukasiewiczTConorm:
        acc = tconorm_lukasiewicz(acc, term);
        break;
      case Aggregator::Max:
        acc = std::max(acc, term);
        break;
      case Aggregator::PaperLiteral:
        acc = first ? term : implication_lukasiewicz(acc, term);
        break;
    }
    first = false;
  }
  return acc;
}

inline double sensor_interaction_degree(const SensorModel& model, const BBox& user_box,
                                        Aggregator agg = Aggregator::LukasiewiczTConorm) {
  if (model.areas.empty()) {
    throw Error(Errc::InvalidArgument, "sensor '" + model.sensor_id + "' has no interaction areas");
  }
  return aggregate(model.areas | std::views::transform([&](const InteractionArea& a) {
                     return area_term(a, user_box);
                   }),
                   agg);
}

struct DegreeKey {
  StepIndex step = 0;
  std::string sensor_id;
  std::string user_id;

  friend auto operator<=>(const DegreeKey&, const DegreeKey&) = default;
};

/// Degrees for every (step, sensor, user) where the user has a location
/// step. Missing cells read as 0.
struct DegreeMatrix {
  std::optional<Grid> grid;  // empty when there were no location streams
  std::vector<std::string> users;
  std::map<DegreeKey, double> cells;

  double at(StepIndex step, const std::string& sensor_id, const std::string& user_id) const {
    auto it = cells.find(DegreeKey{step, sensor_id, user_id});
    return it == cells.end() ? 0.0 : it->second;
  }
};

inline DegreeMatrix degree_matrix(const std::vector<SensorModel>& models,
                                  const std::map<std::string, SegmentedLocationStream>& locations,
                                  Aggregator agg = Aggregator::LukasiewiczTConorm) {
  DegreeMatrix out;
  for (const auto& [user, stream] : locations) {
    if (out.grid && *out.grid != stream.grid) {
      throw Error(Errc::GridMismatch, "location stream of '" + user + "' uses a different grid");
    }
    out.grid = stream.grid;
    out.users.push_back(user);
  }
  for (const auto& model : models) {
    for (const auto& [user, stream] : locations) {
      for (const auto& [step, box] : stream.steps) {
        out.cells.emplace(DegreeKey{step, model.sensor_id, user},
                          sensor_interaction_degree(model, box, agg));
      }
    }
  }
  return out;
}

}  // namespace proxattr
