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

// Seeded random inputs for property tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "proxattr/model.hpp"

namespace proxattr::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  /// Mostly proper boxes, sometimes points or segments.
  BBox box(double lo = -5.0, double hi = 5.0) {
    double x0 = real(lo, hi), x1 = real(lo, hi), y0 = real(lo, hi), y1 = real(lo, hi);
    const double pick = real(0.0, 1.0);
    if (pick < 0.05) x1 = x0, y1 = y0;
    else if (pick < 0.10) x1 = x0;
    else if (pick < 0.15) y1 = y0;
    return BBox{{std::min(x0, x1), std::min(y0, y1)}, {std::max(x0, x1), std::max(y0, y1)}};
  }

  Point point_in(const BBox& b) { return Point{real(b.min.x, b.max.x), real(b.min.y, b.max.y)}; }

  std::vector<SensorSample> sensor_samples(const std::string& id, std::size_t n,
                                           std::int64_t t_max, bool binary = true) {
    std::vector<SensorSample> out;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = binary ? static_cast<double>(integer(0, 1)) : real(0.0, 1.0);
      out.push_back(SensorSample{id, v, Timestamp{integer(0, t_max)}});
    }
    return out;
  }

  std::vector<LocationSample> location_samples(const std::string& id, std::size_t n,
                                               std::int64_t t_max) {
    std::vector<LocationSample> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(LocationSample{id, Point{real(-10, 10), real(-10, 10)}, Timestamp{integer(0, t_max)}});
    }
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace proxattr::testing
