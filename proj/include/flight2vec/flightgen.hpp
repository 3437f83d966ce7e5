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
#include <cstdint>
#include <string>
#include <vector>

#include "flight2vec/types.hpp"

namespace f2v {

/// Declarative route: straight constant-velocity legs between waypoints,
/// circular-arc turns at the given rate, linear climbs, optional racetrack
/// holding patterns, Gaussian noise added last.
struct RouteSpec {
  std::string label;                                  // route class; may be empty
  std::vector<std::array<double, 3>> waypoints;       // lon, lat, alt (flight levels)
  double cruise_speed = 0.01;                         // degrees per step, horizontal
  double turn_rate = 3.0;                             // degrees per step
  double climb_rate = 0.5;                            // flight levels per step
  int holding_count = 0;                              // racetracks at the middle waypoint
  std::array<double, kFeatureCount> noise_std{};      // per-feature Gaussian std
  double steps_per_second = 0.05;                     // 0.05 -> one point every 20 s

  void validate() const;
};

enum class AnomalyKind { kSMA, kHD, kVD, kGoAround };

const char* anomaly_kind_name(AnomalyKind kind);
AnomalyKind anomaly_kind_from_name(const std::string& name);

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::kSMA;
  double start_fraction = 0.25;  // in [0, 1)
  int duration = 20;             // points
  double magnitude = 1.0;        // feature units (degrees or flight levels)

  void validate() const;
};

/// Deterministic trajectory for (spec, seed). Velocities are per-step
/// positional deltas computed before noise is applied.
/// Throws DegenerateRouteError when consecutive waypoints are closer than one
/// step.
Trajectory generate_trajectory(const RouteSpec& spec, std::uint64_t seed);

/// count trajectories per class, labels set from the specs, instance seeds
/// derived from (seed, class index, instance index). With for_recognition
/// set, fewer than two classes is a precondition error.
std::vector<Trajectory> generate_dataset(const std::vector<RouteSpec>& route_specs,
                                         int count_per_class, std::uint64_t seed,
                                         bool for_recognition = false);

/// Returns a copy with the anomaly applied and anomaly_tag set. Never changes
/// n, timestamps or id. Velocities are recomputed as positional deltas over
/// the modified window.
Trajectory inject_anomaly(const Trajectory& traj, const AnomalySpec& spec, std::uint64_t seed);

}  // namespace f2v
