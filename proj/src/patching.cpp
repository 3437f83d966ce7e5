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

#include "flight2vec/patching.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "flight2vec/errors.hpp"
#include "flight2vec/trajectory.hpp"

namespace f2v {

namespace {
constexpr double kRadToDeg = 57.29577951308232087680;

int lower_median(const std::vector<int>& sorted_members) {
  return sorted_members[(sorted_members.size() - 1) / 2];
}

int window_start(int center, int patch_len, int n) {
  int start = center - patch_len / 2;
  return std::clamp(start, 0, n - patch_len);
}
}  // namespace

void PatchingConfig::validate() const {
  if (!(active_threshold_deg > 0.0 && active_threshold_deg < noise_cap_deg && noise_cap_deg <= 180.0)) {
    throw ConfigError("patching: need 0 < active_threshold < noise_cap <= 180");
  }
  if (cluster_gap < 1) throw ConfigError("patching: cluster_gap must be >= 1");
  if (patch_len < 2) throw ConfigError("patching: patch_len must be >= 2");
  if (num_patches < 1) throw ConfigError("patching: num_patches must be >= 1");
}

AngleProfile turn_angles(const Trajectory& traj) {
  const int n = static_cast<int>(traj.points.size());
  if (n < 3) throw PreconditionError("turn_angles: need at least 3 points");
  AngleProfile profile;
  profile.angles.assign(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const TrajectoryPoint& a = traj.points[i - 1];
    const TrajectoryPoint& b = traj.points[i];
    const TrajectoryPoint& c = traj.points[i + 1];
    const double ux = b.lon - a.lon, uy = b.lat - a.lat, uz = b.alt - a.alt;
    const double vx = c.lon - b.lon, vy = c.lat - b.lat, vz = c.alt - b.alt;
    const double nu = std::sqrt(ux * ux + uy * uy + uz * uz);
    const double nv = std::sqrt(vx * vx + vy * vy + vz * vz);
    if (nu == 0.0 || nv == 0.0) continue;
    const double dot = ux * vx + uy * vy + uz * vz;
    const double cx = uy * vz - uz * vy;
    const double cy = uz * vx - ux * vz;
    const double cz = ux * vy - uy * vx;
    const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
    profile.angles[i] = std::atan2(cross, dot) * kRadToDeg;
  }
  return profile;
}

Trajectory denoise(const Trajectory& traj, double noise_cap_deg) {
  const AngleProfile profile = turn_angles(traj);
  Trajectory out;
  out.id = traj.id;
  out.label = traj.label;
  out.anomaly_tag = traj.anomaly_tag;
  out.points.reserve(traj.points.size());
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    if (profile.angles[i] <= noise_cap_deg) out.points.push_back(traj.points[i]);
  }
  if (out.points.size() < 3) {
    throw OverFilteredError("denoise removed too many points from trajectory " + traj.id);
  }
  return out;
}

std::vector<int> detect_active_points(const AngleProfile& profile, double threshold_deg) {
  std::vector<int> active;
  for (std::size_t i = 0; i < profile.angles.size(); ++i) {
    if (profile.angles[i] > threshold_deg) active.push_back(static_cast<int>(i));
  }
  return active;
}

BehaviorClusters cluster_active_points(const std::vector<int>& indices, int gap) {
  BehaviorClusters out;
  std::vector<int> current;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (!current.empty() && indices[i] - current.back() > gap) {
      out.centers.push_back(lower_median(current));
      out.clusters.push_back(std::move(current));
      current.clear();
    }
    current.push_back(indices[i]);
  }
  if (!current.empty()) {
    out.centers.push_back(lower_median(current));
    out.clusters.push_back(std::move(current));
  }
  return out;
}

double uniform_stride(int n, int patch_len, int behavioral, int num_patches) {
  return static_cast<double>(n - patch_len * behavioral) /
         static_cast<double>(num_patches - behavioral);
}

namespace {

struct WorkCluster {
  std::vector<int> members;  // sorted ascending
  int center = 0;
  double peak_angle = 0.0;
};

// Merges clusters whose S-point windows would overlap, then caps the count
// at N keeping the largest-peak-angle clusters. Windows of the result are
// pairwise disjoint.
std::vector<WorkCluster> effective_clusters(const BehaviorClusters& clusters,
                                            const std::vector<double>& angles, int n,
                                            const PatchingConfig& config) {
  std::vector<WorkCluster> work;
  for (std::size_t i = 0; i < clusters.clusters.size(); ++i) {
    WorkCluster c;
    c.members = clusters.clusters[i];
    std::sort(c.members.begin(), c.members.end());
    c.center = lower_median(c.members);
    for (int m : c.members) {
      if (m >= 0 && m < static_cast<int>(angles.size())) c.peak_angle = std::max(c.peak_angle, angles[m]);
    }
    work.push_back(std::move(c));
  }

  bool changed = true;
  while (changed) {
    changed = false;
    std::sort(work.begin(), work.end(),
              [](const WorkCluster& a, const WorkCluster& b) { return a.center < b.center; });
    for (std::size_t i = 0; i + 1 < work.size(); ++i) {
      const int s0 = window_start(work[i].center, config.patch_len, n);
      const int s1 = window_start(work[i + 1].center, config.patch_len, n);
      if (s1 < s0 + config.patch_len) {
        WorkCluster merged;
        merged.members = work[i].members;
        merged.members.insert(merged.members.end(), work[i + 1].members.begin(),
                              work[i + 1].members.end());
        std::sort(merged.members.begin(), merged.members.end());
        merged.members.erase(std::unique(merged.members.begin(), merged.members.end()),
                             merged.members.end());
        merged.center = lower_median(merged.members);
        merged.peak_angle = std::max(work[i].peak_angle, work[i + 1].peak_angle);
        work[i] = std::move(merged);
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        changed = true;
        break;
      }
    }
  }

  if (static_cast<int>(work.size()) > config.num_patches) {
    std::stable_sort(work.begin(), work.end(), [](const WorkCluster& a, const WorkCluster& b) {
      if (a.peak_angle != b.peak_angle) return a.peak_angle > b.peak_angle;
      return a.center < b.center;
    });
    work.resize(config.num_patches);
    std::sort(work.begin(), work.end(),
              [](const WorkCluster& a, const WorkCluster& b) { return a.center < b.center; });
  }
  return work;
}

Patch make_patch(const Trajectory& traj, const std::vector<double>& angles,
                 std::vector<int> indices, bool behavioral) {
  Patch p;
  p.is_behavioral = behavioral;
  p.values.reserve(indices.size() * kFeatureCount);
  for (int idx : indices) {
    const TrajectoryPoint& pt = traj.points[idx];
    for (int f = 0; f < kFeatureCount; ++f) p.values.push_back(pt.feature(f));
    if (idx < static_cast<int>(angles.size())) {
      p.peak_angle_deg = std::max(p.peak_angle_deg, angles[idx]);
    }
  }
  p.source_indices = std::move(indices);
  return p;
}

}  // namespace

PatchSequence build_patches(const Trajectory& traj, const BehaviorClusters& clusters,
                            const PatchingConfig& config) {
  config.validate();
  const int n = static_cast<int>(traj.points.size());
  const int S = config.patch_len;
  const int N = config.num_patches;
  if (n < S) {
    throw TrajectoryTooShortError("trajectory shorter than one patch (n=" + std::to_string(n) +
                                  ", S=" + std::to_string(S) + ")");
  }
  if (static_cast<long long>(N) * S > n) {
    throw InfeasibleConfigError("patch budget exceeds trajectory length (N*S=" +
                                std::to_string(static_cast<long long>(N) * S) +
                                ", n=" + std::to_string(n) + ")");
  }

  std::vector<double> angles(n, 0.0);
  if (n >= 3) angles = turn_angles(traj).angles;

  const std::vector<WorkCluster> work = effective_clusters(clusters, angles, n, config);
  const int g = static_cast<int>(work.size());

  PatchSequence ps;
  ps.original_length = n;
  ps.patch_len = S;

  std::vector<char> covered(n, 0);
  for (const WorkCluster& c : work) {
    const int start = window_start(c.center, S, n);
    std::vector<int> idx(S);
    for (int k = 0; k < S; ++k) {
      idx[k] = start + k;
      covered[start + k] = 1;
    }
    ps.patches.push_back(make_patch(traj, angles, std::move(idx), true));
  }

  const int k_uniform = N - g;
  if (k_uniform > 0) {
    std::vector<int> remaining;
    remaining.reserve(n);
    for (int i = 0; i < n; ++i) {
      if (!covered[i]) remaining.push_back(i);
    }
    const int R = static_cast<int>(remaining.size());
    const int base = R / k_uniform;
    const int extra = R % k_uniform;
    int pos = 0;
    for (int c = 0; c < k_uniform; ++c) {
      const int m = base + (c < extra ? 1 : 0);
      std::vector<int> idx(S);
      for (int j = 0; j < S; ++j) {
        // Integer stride keeps indices strictly increasing and hits both
        // chunk endpoints.
        idx[j] = remaining[pos + (j * (m - 1)) / (S - 1)];
      }
      pos += m;
      ps.patches.push_back(make_patch(traj, angles, std::move(idx), false));
    }
  }

  std::sort(ps.patches.begin(), ps.patches.end(), [](const Patch& a, const Patch& b) {
    return a.source_indices.front() < b.source_indices.front();
  });
  return ps;
}

PatchingOutcome patch_trajectory(const Trajectory& traj, const PatchingConfig& config) {
  config.validate();
  PatchingOutcome out;
  out.denoised = denoise(traj, config.noise_cap_deg);
  const AngleProfile profile = turn_angles(out.denoised);
  const std::vector<int> active = detect_active_points(profile, config.active_threshold_deg);
  const BehaviorClusters clusters = cluster_active_points(active, config.cluster_gap);
  out.patches = build_patches(out.denoised, clusters, config);
  return out;
}

void write_patch_dump(const Trajectory& traj, const PatchSequence& ps, std::ostream& out,
                      bool header) {
  if (header) {
    out << "id,patch,is_behavioral,source_indices";
    for (int k = 0; k < ps.patch_len; ++k) {
      for (int f = 0; f < kFeatureCount; ++f) out << ",p" << k << '_' << kFeatureNames[f];
    }
    out << "\n";
  }
  for (std::size_t i = 0; i < ps.patches.size(); ++i) {
    const Patch& p = ps.patches[i];
    out << traj.id << ',' << i << ',' << (p.is_behavioral ? 1 : 0) << ',';
    for (std::size_t k = 0; k < p.source_indices.size(); ++k) {
      if (k) out << ';';
      out << p.source_indices[k];
    }
    for (double v : p.values) out << ',' << format_value(v);
    out << "\n";
  }
}

}  // namespace f2v
