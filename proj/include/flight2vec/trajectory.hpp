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
#include <iosfwd>
#include <string>
#include <vector>

#include "flight2vec/types.hpp"

namespace f2v {

/// Per-feature z-score statistics fitted on training data only.
/// Population convention: std = sqrt(mean((x - mean)^2)).
struct NormStats {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> std{};
  bool fitted = false;
};

/// Per-trajectory invariant violation counts.
struct ValidationReport {
  std::string trajectory_id;
  int out_of_range = 0;
  int non_monotone_timestamps = 0;
  int non_finite = 0;
  bool too_short = false;

  bool pass() const {
    return out_of_range == 0 && non_monotone_timestamps == 0 && non_finite == 0 && !too_short;
  }
};

/// One malformed table row, reported rather than thrown.
struct RowIssue {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string message;
};

/// Result of parsing a trajectory table. Rows with unparseable or non-finite
/// numeric cells are skipped and recorded in `row_issues`; ids that end up
/// with fewer than two points are dropped and recorded in `dropped`.
struct ParseResult {
  std::vector<Trajectory> trajectories;
  std::vector<RowIssue> row_issues;
  std::vector<std::string> dropped;  // ids dropped for n < 2
};

/// Parses a comma-separated trajectory table (UTF-8, header row, '.' decimal
/// separator). Mandatory columns: id, t, lon, lat, alt, v_lon, v_lat, v_alt;
/// optional: label, anomaly_tag. Rows are grouped by id (first-appearance
/// order) and time-sorted within each trajectory.
/// Throws SchemaError if a mandatory column is missing.
ParseResult parse_trajectory_table(std::istream& in);
ParseResult parse_trajectory_file(const std::string& path);

/// Writes trajectories in the canonical column order with 9-significant-digit
/// float formatting. label/anomaly_tag columns are emitted when any
/// trajectory carries them.
void serialize_trajectory_table(const std::vector<Trajectory>& trajs, std::ostream& out);
void write_trajectory_file(const std::vector<Trajectory>& trajs, const std::string& path);

/// Counts invariant violations. Never throws.
ValidationReport validate_trajectory(const Trajectory& traj);

/// Fits per-feature mean/std over all points of all trajectories.
/// Throws PreconditionError on an empty dataset and DegenerateFeatureError
/// (naming the feature) when a feature has zero variance.
NormStats fit_norm_stats(const std::vector<Trajectory>& dataset);

/// Returns a z-scored copy; timestamps, id and tags are untouched.
Trajectory normalize(const Trajectory& traj, const NormStats& stats);
Trajectory denormalize(const Trajectory& traj, const NormStats& stats);

double normalize_feature(double value, int feature, const NormStats& stats);
double denormalize_feature(double value, int feature, const NormStats& stats);

/// Temporal split: trajectories are stably sorted by (start timestamp, id)
/// and the earliest ceil(fraction * count) go to train, the rest to test.
/// Throws PreconditionError if fraction is outside (0, 1).
std::pair<std::vector<Trajectory>, std::vector<Trajectory>> split_by_time(
    const std::vector<Trajectory>& dataset, double fraction);

/// Formats a double with 9 significant digits (the table convention).
std::string format_value(double v);

}  // namespace f2v
