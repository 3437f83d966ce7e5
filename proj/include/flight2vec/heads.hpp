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
#include <map>
#include <string>
#include <vector>

#include "flight2vec/encoder.hpp"

namespace f2v {

struct HeadTrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  bool freeze_encoder = true;
  double encoder_learning_rate = 1e-4;  // used only when fine-tuning
};

/// Non-autoregressive multi-horizon prediction head: one linear map from
/// [pooled representation ; last-patch embedding] to h_max * 3 normalized
/// future positions, all horizons in a single pass.
struct FtpHead {
  int h_max = 60;
  int d_model = 0;
  ParamStore params;
  int w = -1, b = -1;

  static FtpHead create(int h_max, int d_model, std::uint64_t seed);
  int in_dim() const { return 2 * d_model; }
};

/// One-hidden-layer perceptron (tanh) shared by the FR and AD heads.
struct MlpHead {
  int in_dim = 0, hidden = 0, out_dim = 0;
  ParamStore params;
  int w1 = -1, b1 = -1, w2 = -1, b2 = -1;

  static MlpHead create(int in_dim, int hidden, int out_dim, std::uint64_t seed);
  std::vector<double> forward(const double* x) const;
};

struct FrHead {
  std::vector<std::string> classes;  // index = logit position
  MlpHead mlp;

  static FrHead create(std::vector<std::string> classes, int d_model, int hidden,
                       std::uint64_t seed);
};

struct AdHead {
  MlpHead mlp;

  static AdHead create(int d_model, int hidden, std::uint64_t seed);
};

/// One forward pass; requested horizons are read out of the h_max-slot
/// output and denormalized to physical units.
/// Throws std::out_of_range when a horizon exceeds h_max.
std::map<int, std::array<double, 3>> predict_trajectory(const Model& model, const FtpHead& head,
                                                        const Trajectory& history,
                                                        const std::vector<int>& horizons);

/// Softmax class probabilities (sum to 1).
std::vector<double> classify_flight(const Model& model, const FrHead& head,
                                    const Trajectory& traj);

/// Logistic anomaly score in (0, 1); higher = more anomalous.
double score_anomaly(const Model& model, const AdHead& head, const Trajectory& traj);

struct HeadTrainResult {
  std::vector<double> loss_curve;   // one entry per epoch
  std::size_t samples_used = 0;
  std::size_t samples_skipped = 0;
};

/// FTP: splits each trajectory into (history = all but the last h_max
/// points, targets = those h_max positions) and minimizes MSE in normalized
/// units. With freeze_encoder the encoder is bitwise untouched; otherwise
/// encoder parameters are updated end to end.
HeadTrainResult train_ftp_head(Model& model, FtpHead& head,
                               const std::vector<Trajectory>& dataset,
                               const HeadTrainConfig& config);

/// FR: cross-entropy on trajectory labels (must match head.classes).
/// Throws ConfigError on labels missing from the head's class list.
HeadTrainResult train_fr_head(Model& model, FrHead& head,
                              const std::vector<Trajectory>& dataset,
                              const HeadTrainConfig& config);

/// AD: logistic loss on anomaly_tag presence, positive class weighted by the
/// negative/positive count ratio.
HeadTrainResult train_ad_head(Model& model, AdHead& head,
                              const std::vector<Trajectory>& dataset,
                              const HeadTrainConfig& config);

}  // namespace f2v
