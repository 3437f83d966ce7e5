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

#include <cstdint>
#include <string>
#include <vector>

#include "flight2vec/direction.hpp"
#include "flight2vec/encoder.hpp"

namespace f2v {

enum class MaskTier { kBehavioralOrNeighbor, kOther };

/// Which patches are hidden and at which probability tier. A patch is in the
/// behavioral-or-neighbor tier iff it is behavioral or at patch-order
/// distance 1 from a behavioral patch.
struct MaskPlan {
  std::vector<char> masked;
  std::vector<MaskTier> tier;

  int masked_count() const {
    int c = 0;
    for (char m : masked) c += m ? 1 : 0;
    return c;
  }
};

struct PretrainConfig {
  double rho_b = 0.4;  // masking probability, behavioral-or-neighbor tier
  double rho_n = 0.2;  // masking probability, other tier
  double lambda = 1.0;
  int epochs = 100;
  int batch_size = 256;
  double learning_rate = 1e-5;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossBreakdown {
  double l_mse = 0.0;
  double l_md = 0.0;
  double l_m = 0.0;  // l_md + lambda * l_mse, exactly
  long long masked_points = 0;
};

/// Tier assignment for a patch sequence.
std::vector<MaskTier> mask_tiers(const PatchSequence& ps);

/// Independent Bernoulli draws per patch at its tier's probability. If no
/// patch is drawn, the highest-tier patch with the largest peak angle is
/// force-masked so every training step has at least one target.
MaskPlan sample_mask(const PatchSequence& ps, const PretrainConfig& config, SplitMix64& rng);
MaskPlan sample_mask(const std::vector<MaskTier>& tiers, const std::vector<double>& peak_angles,
                     double rho_b, double rho_n, SplitMix64& rng);

/// Shared linear reconstruction head: one row of S*6 predicted values per
/// patch embedding row.
Matrix reconstruct(const Matrix& contextual, const Model& m);

/// Shared linear direction head: S per-point 26-way logit vectors per patch,
/// flattened to (rows) x (S*26).
Matrix direction_logits(const Matrix& contextual, const Model& m);

/// Mean over masked points of the squared Euclidean norm of the 6-feature
/// residual. Throws PreconditionError when nothing is masked.
double mse_loss(const Matrix& recon, const Matrix& target, const MaskPlan& plan);

/// Mean negative log-softmax of the true class over masked points whose
/// label is not the stationary sentinel. labels has S entries per patch row.
/// Throws PreconditionError when no point is eligible.
double md_loss(const Matrix& logits, const std::vector<int>& labels, const MaskPlan& plan);

LossBreakdown combined_loss(double l_mse, double l_md, double lambda, long long masked_points = 0);

/// A trajectory preprocessed for training: denoised, patched, normalized,
/// direction-labeled.
struct PatchSample {
  Matrix values;                    // N x flat_dim, normalized
  std::vector<int> labels;          // N*S, direction class or kStationaryLabel
  std::vector<MaskTier> tiers;      // N
  std::vector<double> peak_angles;  // N
};

/// Throws the patching pipeline's errors (too short, over-filtered, ...).
PatchSample prepare_sample(const Model& m, const Trajectory& traj);

/// Decoupled-weight-decay Adam over a flat parameter vector.
class AdamW {
 public:
  AdamW(std::size_t n, double lr, double beta1, double beta2, double eps, double weight_decay);
  void step(std::vector<double>& params, const std::vector<double>& grad);

 private:
  double lr_, beta1_, beta2_, eps_, weight_decay_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

struct EpochRecord {
  int epoch = 0;
  LossBreakdown loss;
  double seconds = 0.0;
};

struct PretrainResult {
  std::vector<EpochRecord> curve;
  std::size_t samples_used = 0;
  std::size_t samples_skipped = 0;  // too short to patch
};

/// Self-supervised training loop: shuffle, batch, mask, forward, loss,
/// backprop, AdamW update. Deterministic for a fixed seed: mask draws are
/// keyed by (seed, epoch, sample index), so worker count cannot change
/// results. Throws NumericError (with batch diagnostics) on non-finite loss.
PretrainResult pretrain(Model& model, const std::vector<Trajectory>& train,
                        const PretrainConfig& config);

/// Writes one JSON record per epoch: epoch, l_mse, l_md, l_m, wall-clock
/// seconds, masked-point count.
void write_training_log(const PretrainResult& result, const std::string& path);

}  // namespace f2v
