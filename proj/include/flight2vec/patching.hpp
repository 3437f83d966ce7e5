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

#include <iosfwd>
#include <vector>

#include "flight2vec/types.hpp"

namespace f2v {

/// Turn angles in degrees, one slot per trajectory point. Interior points get
/// the angle between incoming and outgoing 3D displacement vectors; the first
/// and last point have no angle and hold 0.
struct AngleProfile {
  std::vector<double> angles;
};

struct PatchingConfig {
  double active_threshold_deg = 5.0;   // s: angle above which a point is active
  double noise_cap_deg = 150.0;        // denoise filter level
  int cluster_gap = 16;                // max index distance within a cluster
  int patch_len = 32;                  // S
  int num_patches = 20;                // N

  void validate() const;
};

/// Disjoint clusters of active point indices plus one center index each
/// (lower median of the member list).
struct BehaviorClusters {
  std::vector<std::vector<int>> clusters;
  std::vector<int> centers;

  int count() const { return static_cast<int>(clusters.size()); }
};

/// A fixed-size window of trajectory points serving as one encoder token.
struct Patch {
  std::vector<int> source_indices;        // length S, strictly increasing
  std::vector<double> values;             // S*6, point-major
  bool is_behavioral = false;
  double peak_angle_deg = 0.0;            // max turn angle over source points
};

struct PatchSequence {
  std::vector<Patch> patches;  // exactly N, ordered by first source index
  int original_length = 0;     // n
  int patch_len = 0;           // S

  int behavioral_count() const {
    int g = 0;
    for (const Patch& p : patches) g += p.is_behavioral ? 1 : 0;
    return g;
  }
};

/// Computes the 3D turn-angle profile (degrees, in [0, 180]). Zero-length
/// displacements contribute angle 0. Throws PreconditionError for n < 3.
AngleProfile turn_angles(const Trajectory& traj);

/// Removes points whose turn angle exceeds noise_cap_deg, in one pass over
/// the original profile. Throws OverFilteredError if fewer than 3 points
/// would remain (the result would be too short to re-derive angles).
Trajectory denoise(const Trajectory& traj, double noise_cap_deg);

/// Indices j with angle_j strictly greater than the threshold.
std::vector<int> detect_active_points(const AngleProfile& profile, double threshold_deg);

/// Greedy left-to-right grouping of sorted indices: a new cluster starts when
/// the gap to the previous active index exceeds `gap`. Equivalent to
/// connected components of the index-distance graph.
BehaviorClusters cluster_active_points(const std::vector<int>& indices, int gap);

/// Average uniform-sampling stride over non-behavioral segments,
/// (n - S*g) / (N - g).
double uniform_stride(int n, int patch_len, int behavioral, int num_patches);

/// Builds exactly N patches of S points each: one behavioral patch of S
/// consecutive points per cluster center (windows clamped at the ends;
/// overlapping windows merge their clusters; if more clusters than N, the N
/// with the largest peak angle are kept), and the remaining points split into
/// N-g near-equal chunks, each uniformly subsampled to S points with both
/// endpoints included.
/// Throws TrajectoryTooShortError if n < S and InfeasibleConfigError if
/// N*S > n.
PatchSequence build_patches(const Trajectory& traj, const BehaviorClusters& clusters,
                            const PatchingConfig& config);

/// Full per-trajectory pipeline: denoise -> angles -> active points ->
/// clusters -> patches. Returns the patch sequence over the denoised
/// trajectory together with that trajectory.
struct PatchingOutcome {
  Trajectory denoised;
  PatchSequence patches;
};
PatchingOutcome patch_trajectory(const Trajectory& traj, const PatchingConfig& config);

/// Writes one row per patch: trajectory id, patch index, is_behavioral,
/// source index list (';'-separated), and the S*6 values.
void write_patch_dump(const Trajectory& traj, const PatchSequence& ps, std::ostream& out,
                      bool header);

}  // namespace f2v
