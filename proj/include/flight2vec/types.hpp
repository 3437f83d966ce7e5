/*
 * Copyright 2026 The flight2vec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace f2v {

inline constexpr int kFeatureCount = 6;

/// Feature indices into a trajectory point, in table column order.
enum Feature : int {
  kLon = 0,
  kLat = 1,
  kAlt = 2,   // flight levels (hundreds of feet)
  kVLon = 3,  // degrees per step
  kVLat = 4,
  kVAlt = 5,  // flight levels per step
};

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "lon", "lat", "alt", "v_lon", "v_lat", "v_alt"};

/// One timestamped aircraft state sample.
struct TrajectoryPoint {
  double t = 0.0;  // seconds
  double lon = 0.0;
  double lat = 0.0;
  double alt = 0.0;
  double v_lon = 0.0;
  double v_lat = 0.0;
  double v_alt = 0.0;

  double feature(int f) const {
    switch (f) {
      case kLon: return lon;
      case kLat: return lat;
      case kAlt: return alt;
      case kVLon: return v_lon;
      case kVLat: return v_lat;
      default: return v_alt;
    }
  }

  void set_feature(int f, double value) {
    switch (f) {
      case kLon: lon = value; break;
      case kLat: lat = value; break;
      case kAlt: alt = value; break;
      case kVLon: v_lon = value; break;
      case kVLat: v_lat = value; break;
      default: v_alt = value; break;
    }
  }
};

/// An ordered sequence of points. Plain container: invariants (length >= 2,
/// strictly increasing timestamps, in-range values) are checked by
/// validate_trajectory, not enforced at construction.
struct Trajectory {
  std::string id;
  std::vector<TrajectoryPoint> points;
  std::string label;        // route class; empty = unlabeled
  std::string anomaly_tag;  // anomaly kind; empty = clean

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double start_time() const { return points.empty() ? 0.0 : points.front().t; }
};

}  // namespace f2v
