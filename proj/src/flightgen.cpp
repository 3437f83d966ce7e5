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

#include "flight2vec/flightgen.hpp"

#include <algorithm>
#include <cmath>

#include "flight2vec/errors.hpp"
#include "flight2vec/rng.hpp"

namespace f2v {

namespace {

constexpr double kDegToRad = 0.01745329251994329577;
constexpr int kHoldingLegSteps = 20;
constexpr std::size_t kMaxSteps = 500000;

double wrap_angle_rad(double a) {
  while (a > 3.14159265358979323846) a -= 2.0 * 3.14159265358979323846;
  while (a < -3.14159265358979323846) a += 2.0 * 3.14159265358979323846;
  return a;
}

struct Simulator {
  double lon, lat, alt;
  double heading;  // radians, mathematical convention (atan2(dlat, dlon))
  double speed;
  double turn_rate_rad;
  double climb_rate;
  std::vector<std::array<double, 3>> path;

  void record() { path.push_back({lon, lat, alt}); }

  void step_towards(double target_heading, double target_alt) {
    const double err = wrap_angle_rad(target_heading - heading);
    heading += std::clamp(err, -turn_rate_rad, turn_rate_rad);
    advance(target_alt);
  }

  void advance(double target_alt) {
    lon += speed * std::cos(heading);
    lat += speed * std::sin(heading);
    alt += std::clamp(target_alt - alt, -climb_rate, climb_rate);
    record();
  }

  void turn_by(double degrees, double target_alt) {
    double remaining = degrees * kDegToRad;
    while (remaining > 1e-12) {
      const double d = std::min(remaining, turn_rate_rad);
      heading += d;
      remaining -= d;
      advance(target_alt);
      if (path.size() > kMaxSteps) throw Error("holding pattern did not terminate");
    }
  }

  void straight(int steps, double target_alt) {
    for (int i = 0; i < steps; ++i) advance(target_alt);
  }
};

}  // namespace

void RouteSpec::validate() const {
  if (waypoints.size() < 2) throw ConfigError("route: need at least 2 waypoints");
  if (!(cruise_speed > 0.0 && turn_rate > 0.0 && climb_rate > 0.0)) {
    throw ConfigError("route: cruise_speed, turn_rate and climb_rate must be > 0");
  }
  if (!(steps_per_second > 0.0)) throw ConfigError("route: steps_per_second must be > 0");
  for (double s : noise_std) {
    if (s < 0.0) throw ConfigError("route: noise std must be >= 0");
  }
  for (const auto& w : waypoints) {
    if (w[2] < 0.0) throw ConfigError("route: waypoint altitude must be >= 0");
  }
}

const char* anomaly_kind_name(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kSMA: return "SMA";
    case AnomalyKind::kHD: return "HD";
    case AnomalyKind::kVD: return "VD";
    default: return "GoAround";
  }
}

AnomalyKind anomaly_kind_from_name(const std::string& name) {
  if (name == "SMA") return AnomalyKind::kSMA;
  if (name == "HD") return AnomalyKind::kHD;
  if (name == "VD") return AnomalyKind::kVD;
  if (name == "GoAround") return AnomalyKind::kGoAround;
  throw ConfigError("unknown anomaly kind: " + name);
}

void AnomalySpec::validate() const {
  if (!(start_fraction >= 0.0 && start_fraction < 1.0)) {
    throw ConfigError("anomaly: start_fraction must lie in [0, 1)");
  }
  if (magnitude < 0.0) throw ConfigError("anomaly: magnitude must be >= 0");
  const int min_duration = kind == AnomalyKind::kSMA ? 2 : 1;
  if (duration < min_duration) throw ConfigError("anomaly: duration too short");
}

Trajectory generate_trajectory(const RouteSpec& spec, std::uint64_t seed) {
  spec.validate();
  for (std::size_t i = 0; i + 1 < spec.waypoints.size(); ++i) {
    const double dx = spec.waypoints[i + 1][0] - spec.waypoints[i][0];
    const double dy = spec.waypoints[i + 1][1] - spec.waypoints[i][1];
    if (std::hypot(dx, dy) < spec.cruise_speed) {
      throw DegenerateRouteError("waypoints " + std::to_string(i) + " and " +
                                 std::to_string(i + 1) + " are closer than one step");
    }
  }

  Simulator sim;
  sim.lon = spec.waypoints[0][0];
  sim.lat = spec.waypoints[0][1];
  sim.alt = spec.waypoints[0][2];
  sim.heading = std::atan2(spec.waypoints[1][1] - sim.lat, spec.waypoints[1][0] - sim.lon);
  sim.speed = spec.cruise_speed;
  sim.turn_rate_rad = spec.turn_rate * kDegToRad;
  sim.climb_rate = spec.climb_rate;
  sim.record();

  const std::size_t holding_at = spec.waypoints.size() / 2;
  for (std::size_t w = 1; w < spec.waypoints.size(); ++w) {
    const auto& target = spec.waypoints[w];
    while (std::hypot(target[0] - sim.lon, target[1] - sim.lat) > spec.cruise_speed) {
      const double desired = std::atan2(target[1] - sim.lat, target[0] - sim.lon);
      sim.step_towards(desired, target[2]);
      if (sim.path.size() > kMaxSteps) {
        throw Error("route did not converge within the step budget");
      }
    }
    if (w == holding_at) {
      for (int h = 0; h < spec.holding_count; ++h) {
        sim.turn_by(180.0, target[2]);
        sim.straight(kHoldingLegSteps, target[2]);
        sim.turn_by(180.0, target[2]);
        sim.straight(kHoldingLegSteps, target[2]);
      }
    }
  }

  const std::size_t n = sim.path.size();
  Trajectory traj;
  traj.label = spec.label;
  traj.points.resize(n);
  const double dt = 1.0 / spec.steps_per_second;
  for (std::size_t i = 0; i < n; ++i) {
    TrajectoryPoint& p = traj.points[i];
    p.t = static_cast<double>(i) * dt;
    p.lon = sim.path[i][0];
    p.lat = sim.path[i][1];
    p.alt = sim.path[i][2];
  }
  // Velocities are per-step positional deltas, set before noise.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    traj.points[i].v_lon = traj.points[i + 1].lon - traj.points[i].lon;
    traj.points[i].v_lat = traj.points[i + 1].lat - traj.points[i].lat;
    traj.points[i].v_alt = traj.points[i + 1].alt - traj.points[i].alt;
  }
  if (n >= 2) {
    traj.points[n - 1].v_lon = traj.points[n - 2].v_lon;
    traj.points[n - 1].v_lat = traj.points[n - 2].v_lat;
    traj.points[n - 1].v_alt = traj.points[n - 2].v_alt;
  }

  SplitMix64 rng(derive_seed(seed, {0x6e6f6973}));
  for (TrajectoryPoint& p : traj.points) {
    for (int f = 0; f < kFeatureCount; ++f) {
      if (spec.noise_std[f] > 0.0) p.set_feature(f, p.feature(f) + rng.normal(0.0, spec.noise_std[f]));
    }
  }
  for (TrajectoryPoint& p : traj.points) p.alt = std::max(p.alt, 0.0);
  return traj;
}

std::vector<Trajectory> generate_dataset(const std::vector<RouteSpec>& route_specs,
                                         int count_per_class, std::uint64_t seed,
                                         bool for_recognition) {
  if (route_specs.empty()) throw PreconditionError("generate_dataset: no route specs");
  if (for_recognition && route_specs.size() < 2) {
    throw PreconditionError("generate_dataset: recognition needs at least 2 classes");
  }
  std::vector<Trajectory> out;
  out.reserve(route_specs.size() * static_cast<std::size_t>(count_per_class));
  for (std::size_t c = 0; c < route_specs.size(); ++c) {
    for (int k = 0; k < count_per_class; ++k) {
      Trajectory t = generate_trajectory(route_specs[c],
                                         derive_seed(seed, {static_cast<std::uint64_t>(c),
                                                            static_cast<std::uint64_t>(k)}));
      t.id = (route_specs[c].label.empty() ? "class" + std::to_string(c) : route_specs[c].label) +
             "_" + std::to_string(k);
      out.push_back(std::move(t));
    }
  }
  return out;
}

namespace {

// Trapezoidal ramp over `duration` points peaking at exactly 1.
double ramp_weight(int k, int duration) {
  const int ru = duration / 4;
  if (ru == 0) return 1.0;
  if (k < ru) return static_cast<double>(k + 1) / ru;
  if (k >= duration - ru) return static_cast<double>(duration - k) / ru;
  return 1.0;
}

void recompute_velocity_window(Trajectory& traj, int first_changed, int last_changed) {
  const int n = static_cast<int>(traj.points.size());
  const int lo = std::max(0, first_changed - 1);
  const int hi = std::min(n - 2, last_changed);
  for (int i = lo; i <= hi; ++i) {
    traj.points[i].v_lon = traj.points[i + 1].lon - traj.points[i].lon;
    traj.points[i].v_lat = traj.points[i + 1].lat - traj.points[i].lat;
    traj.points[i].v_alt = traj.points[i + 1].alt - traj.points[i].alt;
  }
  if (last_changed >= n - 2 && n >= 2) {
    traj.points[n - 1].v_lon = traj.points[n - 2].v_lon;
    traj.points[n - 1].v_lat = traj.points[n - 2].v_lat;
    traj.points[n - 1].v_alt = traj.points[n - 2].v_alt;
  }
}

}  // namespace

Trajectory inject_anomaly(const Trajectory& traj, const AnomalySpec& spec, std::uint64_t seed) {
  spec.validate();
  const int n = static_cast<int>(traj.points.size());
  if (n < 2) throw PreconditionError("inject_anomaly: trajectory too short");

  Trajectory out = traj;
  out.anomaly_tag = anomaly_kind_name(spec.kind);

  if (spec.kind == AnomalyKind::kGoAround) {
    // Find a descending segment at or after the requested start.
    int d0 = -1;
    const int hint = static_cast<int>(spec.start_fraction * n);
    for (int pass = 0; pass < 2 && d0 < 0; ++pass) {
      const int from = pass == 0 ? hint : 0;
      for (int i = from; i + 1 < n; ++i) {
        if (traj.points[i + 1].alt < traj.points[i].alt - 1e-9) {
          d0 = i;
          break;
        }
      }
    }
    if (d0 < 0) throw InapplicableAnomalyError("GoAround: no descending segment");
    if (d0 + spec.duration > n) {
      throw InapplicableAnomalyError("GoAround: descent too close to trajectory end");
    }
    // Climb by `magnitude` over the window, then resume the original descent
    // profile (per-step altitude deltas) from the new height.
    const double base = traj.points[d0].alt;
    for (int k = 1; k < spec.duration; ++k) {
      out.points[d0 + k].alt = base + spec.magnitude * static_cast<double>(k) / (spec.duration - 1);
    }
    for (int i = d0 + spec.duration; i < n; ++i) {
      out.points[i].alt = std::max(
          0.0, out.points[i - 1].alt + (traj.points[i].alt - traj.points[i - 1].alt));
    }
    recompute_velocity_window(out, d0, n - 1);
    return out;
  }

  const int start = static_cast<int>(spec.start_fraction * n);
  if (start + spec.duration > n) {
    throw PreconditionError("inject_anomaly: window does not fit inside trajectory");
  }

  switch (spec.kind) {
    case AnomalyKind::kSMA: {
      SplitMix64 rng(derive_seed(seed, {0x534d41}));
      for (int k = 0; k < spec.duration; ++k) {
        TrajectoryPoint& p = out.points[start + k];
        p.lon += rng.normal(0.0, spec.magnitude);
        p.lat += rng.normal(0.0, spec.magnitude);
        p.alt = std::max(0.0, p.alt + rng.normal(0.0, spec.magnitude));
      }
      break;
    }
    case AnomalyKind::kHD: {
      for (int k = 0; k < spec.duration; ++k) {
        const int i = start + k;
        const int j = std::min(i + 1, n - 1);
        const double dx = traj.points[j].lon - traj.points[std::max(0, j - 1)].lon;
        const double dy = traj.points[j].lat - traj.points[std::max(0, j - 1)].lat;
        const double norm = std::hypot(dx, dy);
        if (norm == 0.0) continue;
        const double w = ramp_weight(k, spec.duration) * spec.magnitude;
        out.points[i].lon += -dy / norm * w;
        out.points[i].lat += dx / norm * w;
      }
      break;
    }
    case AnomalyKind::kVD: {
      for (int k = 0; k < spec.duration; ++k) {
        out.points[start + k].alt = std::max(
            0.0, out.points[start + k].alt + ramp_weight(k, spec.duration) * spec.magnitude);
      }
      break;
    }
    default:
      break;
  }
  recompute_velocity_window(out, start, start + spec.duration - 1);
  return out;
}

}  // namespace f2v
