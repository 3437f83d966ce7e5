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

#include "flight2vec/direction.hpp"

#include <stdexcept>

#include "flight2vec/errors.hpp"

namespace f2v {

namespace {
int sign_with_eps(double v, double eps) {
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}
}  // namespace

std::array<double, 3> direction_vector(const TrajectoryPoint& a, const TrajectoryPoint& b) {
  return {b.lon - a.lon, b.lat - a.lat, b.alt - a.alt};
}

DirectionTriplet sign_triplet(const std::array<double, 3>& v, double eps) {
  return {sign_with_eps(v[0], eps), sign_with_eps(v[1], eps), sign_with_eps(v[2], eps)};
}

int triplet_to_class(const DirectionTriplet& t) {
  if (t.all_zero()) {
    throw StationaryDirectionError("the all-zero triplet has no direction class");
  }
  const int r = (t.d_lon + 1) * 9 + (t.d_lat + 1) * 3 + (t.d_alt + 1);
  return r < 13 ? r : r - 1;
}

DirectionTriplet class_to_triplet(int class_id) {
  if (class_id < 0 || class_id >= kDirectionClasses) {
    throw std::out_of_range("direction class id outside [0, 25]");
  }
  const int r = class_id < 13 ? class_id : class_id + 1;
  return {r / 9 - 1, (r / 3) % 3 - 1, r % 3 - 1};
}

std::vector<int> label_trajectory_directions(const Trajectory& traj, double eps) {
  if (traj.points.size() < 2) {
    throw PreconditionError("label_trajectory_directions: need at least 2 points");
  }
  std::vector<int> labels(traj.points.size() - 1, kStationaryLabel);
  for (std::size_t i = 0; i + 1 < traj.points.size(); ++i) {
    const DirectionTriplet t =
        sign_triplet(direction_vector(traj.points[i], traj.points[i + 1]), eps);
    if (!t.all_zero()) labels[i] = triplet_to_class(t);
  }
  return labels;
}

}  // namespace f2v
