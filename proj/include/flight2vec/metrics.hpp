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
#include <vector>

#include "flight2vec/encoder.hpp"
#include "flight2vec/types.hpp"

namespace f2v {

/// Mean-radius sphere used for great-circle distances.
inline constexpr double kEarthRadiusKm = 6371.0088;

/// Targets with |truth| below this are excluded from MAPE.
inline constexpr double kMapeEpsilon = 1e-6;

using Position = std::array<double, 3>;  // lon, lat, alt

struct RegressionReport {
  int horizon = 0;
  std::array<double, 3> mae{};
  std::array<double, 3> mape{};   // percent; meaningful only where defined
  std::array<bool, 3> mape_defined{};
  std::array<long long, 3> mape_excluded{};
  std::array<double, 3> rmse{};
  double mde_km = 0.0;
  std::size_t count = 0;
};

struct ClassificationReport {
  double acc = 0.0;
  double macro_pre = 0.0;
  double macro_rec = 0.0;
  std::vector<std::vector<long long>> confusion;  // rows = truth
  int zero_support_classes = 0;                   // reported as a warning
};

struct DetectionReport {
  double auc = 0.0;
  double aupr = 0.0;
  std::size_t count = 0;
  long long positives = 0;
};

struct TimingReport {
  double mtc_ms = 0.0;
  double parameters_millions = 0.0;
  std::size_t trajectories = 0;
};

/// Great-circle (haversine) distance in km; altitude excluded.
double haversine_km(double lon1, double lat1, double lon2, double lat2);

/// Mean haversine distance over paired positions.
double mde(const std::vector<Position>& pred, const std::vector<Position>& truth);

/// Per-dimension MAE / MAPE(%) / RMSE plus MDE. MAPE excludes targets with
/// |truth| < kMapeEpsilon and reports the exclusion count; if every point is
/// excluded the dimension's MAPE is flagged undefined.
RegressionReport regression_metrics(const std::vector<Position>& pred,
                                    const std::vector<Position>& truth, int horizon);

/// ACC plus macro-averaged PRE/REC over classes 0..K-1 (K inferred from the
/// labels). Zero-support (or never-predicted) classes contribute 0 and are
/// counted as warnings.
ClassificationReport classification_metrics(const std::vector<int>& pred,
                                            const std::vector<int>& truth);

/// AUC via the midrank statistic (ties get the average rank); AUPR via
/// right-interpolated step integration over tie blocks, descending score
/// order. Throws UndefinedMetricError unless both label values are present.
DetectionReport auc_aupr(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mean wall-clock milliseconds per trajectory representation after 10
/// warmup runs. Requires >= 100 trajectories.
TimingReport mtc(const Model& model, const std::vector<Trajectory>& dataset);

enum class BaselineKind { kConstantPosition, kLinearExtrapolation };

/// Training-free prediction oracles: repeat the last point, or extrapolate
/// the last displacement.
Position baseline_predict(const Trajectory& history, int horizon, BaselineKind kind);

}  // namespace f2v
