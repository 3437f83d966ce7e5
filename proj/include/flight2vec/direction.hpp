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
#include <vector>

#include "flight2vec/types.hpp"

namespace f2v {

inline constexpr int kDirectionClasses = 26;

/// Sentinel for point pairs whose displacement is within the dead zone on all
/// three axes (or for the unlabeled final point). Excluded from loss terms.
inline constexpr int kStationaryLabel = -1;

/// Per-axis motion sign, each component in {-1, 0, +1}.
struct DirectionTriplet {
  int d_lon = 0;
  int d_lat = 0;
  int d_alt = 0;

  bool operator==(const DirectionTriplet&) const = default;
  bool all_zero() const { return d_lon == 0 && d_lat == 0 && d_alt == 0; }
};

/// Positional displacement from a to b: (dlon, dlat, dalt).
std::array<double, 3> direction_vector(const TrajectoryPoint& a, const TrajectoryPoint& b);

/// Componentwise sign with an eps dead zone: +1 if v > eps, -1 if v < -eps,
/// else 0. eps = 0 reproduces the exact sign function.
DirectionTriplet sign_triplet(const std::array<double, 3>& v, double eps);

/// Canonical class index in [0, 25]. Ordering: r = (d_lon+1)*9 + (d_lat+1)*3
/// + (d_alt+1); the all-zero slot (r = 13) is excluded and higher ranks shift
/// down by one. Throws StationaryDirectionError on the all-zero triplet.
int triplet_to_class(const DirectionTriplet& t);

/// Exact inverse of triplet_to_class. Throws std::out_of_range for ids
/// outside [0, 25].
DirectionTriplet class_to_triplet(int class_id);

/// Labels each consecutive point pair (i, i+1); output length n-1. Pairs with
/// all displacements inside the eps dead zone get kStationaryLabel.
std::vector<int> label_trajectory_directions(const Trajectory& traj, double eps);

}  // namespace f2v
