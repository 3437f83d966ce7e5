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
#include <vector>

#include "flight2vec/kernels.hpp"
#include "flight2vec/params.hpp"
#include "flight2vec/patching.hpp"
#include "flight2vec/rng.hpp"
#include "flight2vec/trajectory.hpp"

namespace f2v {

struct EncoderConfig {
  int patch_len = 32;    // S
  int feat_dim = 6;
  int num_patches = 20;  // N
  int d_model = 256;
  int n_layers = 3;
  int n_heads = 16;
  int d_ff = 512;
  double dropout = 0.2;
  double ln_eps = 1e-5;

  int flat_dim() const { return patch_len * feat_dim; }
  int head_dim() const { return d_model / n_heads; }
  void validate() const;
};

struct LayerBlocks {
  int ln1_g, ln1_b;
  int w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o;
  int ln2_g, ln2_b;
  int w_ff1, b_ff1, w_ff2, b_ff2;
};

/// The full pretraining model: patch projection, position table, mask token,
/// transformer stack (pre-LN residual wiring with a final layer norm),
/// reconstruction head and direction head. Parameters live in one flat store
/// in declared order; the normalization stats and patching hyperparameters
/// travel with the model so a checkpoint is self-contained.
struct Model {
  EncoderConfig cfg;
  PatchingConfig patching;
  NormStats stats;
  double direction_eps = 1e-6;  // dead zone for direction labels, normalized units

  ParamStore params;
  int w_p = -1;        // d_model x flat_dim
  int w_pos = -1;      // N x d_model
  int mask_token = -1; // 1 x d_model
  std::vector<LayerBlocks> layers;
  int lnf_g = -1, lnf_b = -1;
  int w_recon = -1, b_recon = -1;  // flat_dim x d_model, 1 x flat_dim
  int w_dir = -1, b_dir = -1;      // (S*26) x d_model, 1 x (S*26)

  static Model create(const EncoderConfig& cfg, const PatchingConfig& patching,
                      const NormStats& stats, std::uint64_t seed);

  std::size_t parameter_count() const { return params.size(); }
};

/// Per-layer cached activations for the backward pass. Row counts are
/// batch * N throughout.
struct LayerActs {
  Matrix ln1_out, q, k, v;
  Matrix attn_w;   // (batch * heads * N) x N softmax rows
  Matrix ctx, attn_out, x_mid;
  Matrix ln2_out, ff_h, ff_g, ff_out, x_out;
  Matrix drop1, drop2;  // element multipliers; empty when dropout is off
  std::vector<double> ln1_mean, ln1_rstd, ln2_mean, ln2_rstd;
};

struct EncodeActs {
  int batch = 0;
  std::vector<LayerActs> layers;
  Matrix z;  // final layer-norm output, (batch * N) x d_model
  std::vector<double> lnf_mean, lnf_rstd;
};

/// Y[i] = W_p * flatten(p_i) + W_pos[i] for each patch row; masked rows use
/// the learned mask token instead of the projection. P is (batch * N) x
/// flat_dim; `masked` may be empty (nothing masked).
/// Throws ShapeError when the row count is not a multiple of N.
Matrix embed_batch(const Model& m, const Matrix& patch_values, const std::vector<char>& masked);

/// Spec surface for a single patch sequence (no masking).
Matrix embed_patches(const Model& m, const PatchSequence& ps);

/// Transformer stack over embedded input y0 ((batch * N) x d_model).
/// Evaluation mode (training=false) is deterministic: dropout off.
/// Throws NumericError if y0 contains non-finite values.
void transformer_forward(const Model& m, const Matrix& y0, int batch, bool training,
                         SplitMix64* dropout_rng, EncodeActs& acts);

/// Accumulates parameter gradients into `grad` (flat, same layout as
/// m.params) and returns the gradient w.r.t. y0 in dY0 if non-null.
void transformer_backward(const Model& m, const Matrix& y0, const EncodeActs& acts,
                          const Matrix& dZ, int batch, std::vector<double>& grad, Matrix* dY0);

/// Embedding backward: routes dY0 into W_p (unmasked rows), the mask token
/// (masked rows) and W_pos (all rows).
void embed_backward(const Model& m, const Matrix& patch_values, const std::vector<char>& masked,
                    const Matrix& dY0, std::vector<double>& grad);

/// Eval-mode convenience: contextual embeddings for one already-embedded
/// sequence (spec operation `encode`).
Matrix encode(const Model& m, const Matrix& y);

/// Arithmetic mean over the patch axis.
std::vector<double> pool_representation(CMatView contextual);

/// Running count of multiply-add FLOPs spent in the attention stage (the
/// O(N^2 * d_model) part only). Used by the complexity probe.
std::uint64_t attention_flops();
void reset_attention_flops();

/// Full inference pipeline for one trajectory: denoise, patch, normalize
/// patch values, embed, encode, pool.
struct TrajectoryEmbedding {
  PatchSequence patches;
  Matrix contextual;             // N x d_model
  std::vector<double> pooled;    // d_model
  std::vector<double> last_patch;  // contextual row of the final patch
};
TrajectoryEmbedding embed_trajectory(const Model& m, const Trajectory& traj);

/// Normalized patch-value matrix (one row per patch, flat_dim columns).
Matrix normalized_patch_matrix(const Model& m, const PatchSequence& ps);

}  // namespace f2v
