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

#include "flight2vec/pretrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "flight2vec/errors.hpp"

namespace f2v {

void PretrainConfig::validate() const {
  if (!(rho_n >= 0.0 && rho_n < rho_b && rho_b <= 1.0)) {
    throw ConfigError("pretrain: need 0 <= rho_n < rho_b <= 1");
  }
  if (lambda < 0.0) throw ConfigError("pretrain: lambda must be >= 0");
  if (epochs < 1 || batch_size < 1) throw ConfigError("pretrain: epochs and batch_size must be >= 1");
  if (learning_rate < 0.0 || weight_decay < 0.0) {
    throw ConfigError("pretrain: learning_rate and weight_decay must be >= 0");
  }
}

std::vector<MaskTier> mask_tiers(const PatchSequence& ps) {
  const int n = static_cast<int>(ps.patches.size());
  std::vector<MaskTier> tiers(n, MaskTier::kOther);
  for (int i = 0; i < n; ++i) {
    const bool near_behavioral = ps.patches[i].is_behavioral ||
                                 (i > 0 && ps.patches[i - 1].is_behavioral) ||
                                 (i + 1 < n && ps.patches[i + 1].is_behavioral);
    if (near_behavioral) tiers[i] = MaskTier::kBehavioralOrNeighbor;
  }
  return tiers;
}

MaskPlan sample_mask(const std::vector<MaskTier>& tiers, const std::vector<double>& peak_angles,
                     double rho_b, double rho_n, SplitMix64& rng) {
  MaskPlan plan;
  plan.tier = tiers;
  plan.masked.assign(tiers.size(), 0);
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    const double p = tiers[i] == MaskTier::kBehavioralOrNeighbor ? rho_b : rho_n;
    plan.masked[i] = rng.bernoulli(p) ? 1 : 0;
  }
  if (plan.masked_count() == 0 && !tiers.empty()) {
    // Force-mask the highest-tier patch with the largest peak angle.
    bool has_b = false;
    for (MaskTier t : tiers) has_b |= t == MaskTier::kBehavioralOrNeighbor;
    const MaskTier want = has_b ? MaskTier::kBehavioralOrNeighbor : MaskTier::kOther;
    int best = -1;
    for (std::size_t i = 0; i < tiers.size(); ++i) {
      if (tiers[i] != want) continue;
      if (best < 0 || peak_angles[i] > peak_angles[best]) best = static_cast<int>(i);
    }
    plan.masked[best] = 1;
  }
  return plan;
}

MaskPlan sample_mask(const PatchSequence& ps, const PretrainConfig& config, SplitMix64& rng) {
  std::vector<double> peaks;
  peaks.reserve(ps.patches.size());
  for (const Patch& p : ps.patches) peaks.push_back(p.peak_angle_deg);
  return sample_mask(mask_tiers(ps), peaks, config.rho_b, config.rho_n, rng);
}

Matrix reconstruct(const Matrix& contextual, const Model& m) {
  Matrix out(contextual.rows, m.cfg.flat_dim());
  matmul_nt(contextual, m.params.mat(m.w_recon), out);
  add_row_vector(out, m.params.row(m.b_recon, 0));
  return out;
}

Matrix direction_logits(const Matrix& contextual, const Model& m) {
  Matrix out(contextual.rows, m.cfg.patch_len * 26);
  matmul_nt(contextual, m.params.mat(m.w_dir), out);
  add_row_vector(out, m.params.row(m.b_dir, 0));
  return out;
}

double mse_loss(const Matrix& recon, const Matrix& target, const MaskPlan& plan) {
  if (recon.rows != target.rows || recon.cols != target.cols) {
    throw ShapeError("mse_loss: shape mismatch");
  }
  const int points_per_patch = recon.cols / kFeatureCount;
  long long m_points = 0;
  double sum = 0.0;
  for (int i = 0; i < recon.rows; ++i) {
    if (!plan.masked[i]) continue;
    m_points += points_per_patch;
    const double* r = recon.row(i);
    const double* t = target.row(i);
    for (int j = 0; j < recon.cols; ++j) {
      const double d = r[j] - t[j];
      sum += d * d;
    }
  }
  if (m_points == 0) throw PreconditionError("mse_loss: no masked points");
  return sum / static_cast<double>(m_points);
}

double md_loss(const Matrix& logits, const std::vector<int>& labels, const MaskPlan& plan) {
  const int s = logits.cols / 26;
  if (logits.cols % 26 != 0 || static_cast<int>(labels.size()) != logits.rows * s) {
    throw ShapeError("md_loss: logits must be rows x (S*26) with S labels per row");
  }
  long long eligible = 0;
  double sum = 0.0;
  for (int i = 0; i < logits.rows; ++i) {
    if (!plan.masked[i]) continue;
    const double* row = logits.row(i);
    for (int k = 0; k < s; ++k) {
      const int label = labels[static_cast<std::size_t>(i) * s + k];
      if (label == kStationaryLabel) continue;
      const double* l = row + k * 26;
      double mx = l[0];
      for (int c = 1; c < 26; ++c) mx = std::max(mx, l[c]);
      double z = 0.0;
      for (int c = 0; c < 26; ++c) z += std::exp(l[c] - mx);
      sum += -(l[label] - mx - std::log(z));
      ++eligible;
    }
  }
  if (eligible == 0) throw PreconditionError("md_loss: no masked, labeled points");
  return sum / static_cast<double>(eligible);
}

LossBreakdown combined_loss(double l_mse, double l_md, double lambda, long long masked_points) {
  if (!std::isfinite(l_mse) || !std::isfinite(l_md)) {
    throw NumericError("combined_loss: non-finite component");
  }
  LossBreakdown b;
  b.l_mse = l_mse;
  b.l_md = l_md;
  b.l_m = l_md + lambda * l_mse;
  b.masked_points = masked_points;
  return b;
}

PatchSample prepare_sample(const Model& m, const Trajectory& traj) {
  const PatchingOutcome po = patch_trajectory(traj, m.patching);
  const Trajectory norm = normalize(po.denoised, m.stats);
  const std::vector<int> point_labels = label_trajectory_directions(norm, m.direction_eps);

  PatchSample s;
  s.values = normalized_patch_matrix(m, po.patches);
  const int S = m.cfg.patch_len;
  s.labels.assign(static_cast<std::size_t>(po.patches.patches.size()) * S, kStationaryLabel);
  for (std::size_t i = 0; i < po.patches.patches.size(); ++i) {
    const Patch& p = po.patches.patches[i];
    for (int k = 0; k < S; ++k) {
      const int src = p.source_indices[k];
      // Direction targets pair the source point with its successor in the
      // original trajectory; the final point stays unlabeled.
      if (src < static_cast<int>(point_labels.size())) {
        s.labels[i * S + k] = point_labels[src];
      }
    }
    s.peak_angles.push_back(p.peak_angle_deg);
  }
  s.tiers = mask_tiers(po.patches);
  return s;
}

AdamW::AdamW(std::size_t n, double lr, double beta1, double beta2, double eps, double weight_decay)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay),
      m_(n, 0.0), v_(n, 0.0) {}

void AdamW::step(std::vector<double>& params, const std::vector<double>& grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(params.size()); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr_ * weight_decay_ * params[i];
    params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
}

namespace {

struct BatchLoss {
  double l_mse = 0.0;
  double l_md = 0.0;
  long long masked_points = 0;
};

// Forward + loss + full backward for one batch of samples. Gradients are
// accumulated into `grad`; returns the batch loss components.
BatchLoss pretrain_step(const Model& model, const std::vector<const PatchSample*>& batch,
                        const std::vector<MaskPlan>& plans, double lambda,
                        SplitMix64* dropout_rng, std::vector<double>& grad) {
  const int B = static_cast<int>(batch.size());
  const int N = model.cfg.num_patches;
  const int F = model.cfg.flat_dim();
  const int S = model.cfg.patch_len;

  Matrix P(B * N, F);
  std::vector<char> masked(static_cast<std::size_t>(B) * N, 0);
  for (int s = 0; s < B; ++s) {
    for (int i = 0; i < N; ++i) {
      const double* src = batch[s]->values.row(i);
      std::copy(src, src + F, P.row(s * N + i));
      masked[static_cast<std::size_t>(s) * N + i] = plans[s].masked[i];
    }
  }

  const Matrix y0 = embed_batch(model, P, masked);
  EncodeActs acts;
  transformer_forward(model, y0, B, true, dropout_rng, acts);
  const Matrix recon = reconstruct(acts.z, model);
  const Matrix logits = direction_logits(acts.z, model);

  BatchLoss out;
  Matrix d_recon(recon.rows, recon.cols);
  Matrix d_logits(logits.rows, logits.cols);

  // Per-sample means, averaged across the batch. The MD term averages over
  // samples that have at least one masked, labeled point.
  std::vector<double> md_per_sample(B, 0.0);
  std::vector<char> md_has(B, 0);
  int md_samples = 0;
  for (int s = 0; s < B; ++s) {
    long long eligible = 0;
    for (int i = 0; i < N; ++i) {
      if (!plans[s].masked[i]) continue;
      for (int k = 0; k < S; ++k) {
        if (batch[s]->labels[static_cast<std::size_t>(i) * S + k] != kStationaryLabel) ++eligible;
      }
    }
    if (eligible > 0) {
      md_has[s] = 1;
      ++md_samples;
    }
  }

  for (int s = 0; s < B; ++s) {
    const long long m_points = static_cast<long long>(plans[s].masked_count()) * S;
    out.masked_points += m_points;
    const double inv_m = 1.0 / static_cast<double>(m_points);
    double sample_mse = 0.0;
    double sample_md = 0.0;
    long long eligible = 0;

    for (int i = 0; i < N; ++i) {
      const int row = s * N + i;
      if (!plans[s].masked[i]) continue;
      const double* r = recon.row(row);
      const double* t = P.row(row);
      double* dr = d_recon.row(row);
      for (int j = 0; j < F; ++j) {
        const double diff = r[j] - t[j];
        sample_mse += diff * diff;
        dr[j] = 2.0 * diff * inv_m * lambda / static_cast<double>(B);
      }
      if (!md_has[s]) continue;
      const double* lrow = logits.row(row);
      double* dlrow = d_logits.row(row);
      for (int k = 0; k < S; ++k) {
        const int label = batch[s]->labels[static_cast<std::size_t>(i) * S + k];
        if (label == kStationaryLabel) continue;
        ++eligible;
        const double* l = lrow + k * 26;
        double mx = l[0];
        for (int c = 1; c < 26; ++c) mx = std::max(mx, l[c]);
        double z = 0.0;
        for (int c = 0; c < 26; ++c) z += std::exp(l[c] - mx);
        sample_md += -(l[label] - mx - std::log(z));
        double* dl = dlrow + k * 26;
        for (int c = 0; c < 26; ++c) dl[c] = std::exp(l[c] - mx) / z;
        dl[label] -= 1.0;
      }
    }

    out.l_mse += sample_mse * inv_m / static_cast<double>(B);
    if (md_has[s] && eligible > 0) {
      out.l_md += sample_md / static_cast<double>(eligible) / static_cast<double>(md_samples);
      const double scale = 1.0 / (static_cast<double>(eligible) * md_samples);
      for (int i = 0; i < N; ++i) {
        if (!plans[s].masked[i]) continue;
        double* dlrow = d_logits.row(s * N + i);
        for (int j = 0; j < d_logits.cols; ++j) dlrow[j] *= scale;
      }
    }
  }

  // Head backward into dZ plus head parameter grads.
  Matrix dZ(acts.z.rows, acts.z.cols);
  {
    Matrix tmp(dZ.rows, dZ.cols);
    matmul_nn(d_recon, model.params.mat(model.w_recon), dZ);
    matmul_tn_acc(d_recon, acts.z, model.params.mat_in(grad, model.w_recon));
    col_sum_acc(d_recon, model.params.mat_in(grad, model.b_recon).row(0));
    matmul_nn(d_logits, model.params.mat(model.w_dir), tmp);
    for (std::size_t i = 0; i < dZ.data.size(); ++i) dZ.data[i] += tmp.data[i];
    matmul_tn_acc(d_logits, acts.z, model.params.mat_in(grad, model.w_dir));
    col_sum_acc(d_logits, model.params.mat_in(grad, model.b_dir).row(0));
  }

  Matrix dY0;
  transformer_backward(model, y0, acts, dZ, B, grad, &dY0);
  embed_backward(model, P, masked, dY0, grad);
  return out;
}

}  // namespace

PretrainResult pretrain(Model& model, const std::vector<Trajectory>& train,
                        const PretrainConfig& config) {
  config.validate();
  if (train.empty()) throw PreconditionError("pretrain: empty training set");

  std::vector<PatchSample> samples;
  PretrainResult result;
  for (const Trajectory& t : train) {
    try {
      samples.push_back(prepare_sample(model, t));
    } catch (const Error&) {
      ++result.samples_skipped;
    }
  }
  result.samples_used = samples.size();
  if (samples.empty()) throw PreconditionError("pretrain: no trajectory long enough to patch");

  AdamW opt(model.params.size(), config.learning_rate, config.adam_beta1, config.adam_beta2,
            config.adam_eps, config.weight_decay);
  std::vector<double> grad(model.params.size(), 0.0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 shuffle_rng(derive_seed(config.seed, {0x73687566, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
    }

    double epoch_mse = 0.0, epoch_md = 0.0;
    long long epoch_masked = 0;
    int batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += config.batch_size) {
      const std::size_t end = std::min(order.size(), pos + config.batch_size);
      std::vector<const PatchSample*> batch;
      std::vector<MaskPlan> plans;
      for (std::size_t q = pos; q < end; ++q) {
        const PatchSample& s = samples[order[q]];
        batch.push_back(&s);
        // Mask draws are keyed by the sample's dataset index, not its batch
        // position, so parallel batch assembly cannot change them.
        SplitMix64 mask_rng(derive_seed(
            config.seed, {0x6d61736b, static_cast<std::uint64_t>(epoch), order[q]}));
        plans.push_back(sample_mask(s.tiers, s.peak_angles, config.rho_b, config.rho_n, mask_rng));
      }
      SplitMix64 dropout_rng(derive_seed(
          config.seed, {0x64726f70, static_cast<std::uint64_t>(epoch), pos}));

      std::fill(grad.begin(), grad.end(), 0.0);
      const BatchLoss loss =
          pretrain_step(model, batch, plans, config.lambda, &dropout_rng, grad);
      const double l_m = loss.l_md + config.lambda * loss.l_mse;
      if (!std::isfinite(l_m)) {
        throw NumericError("pretrain: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches) + " (l_mse=" +
                           std::to_string(loss.l_mse) + ", l_md=" + std::to_string(loss.l_md) + ")");
      }
      opt.step(model.params.values(), grad);
      epoch_mse += loss.l_mse;
      epoch_md += loss.l_md;
      epoch_masked += loss.masked_points;
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = combined_loss(epoch_mse / batches, epoch_md / batches, config.lambda, epoch_masked);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.curve.push_back(rec);
  }
  return result;
}

void write_training_log(const PretrainResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write training log: " + path);
  for (const EpochRecord& r : result.curve) {
    out << "{\"epoch\":" << r.epoch << ",\"l_mse\":" << format_value(r.loss.l_mse)
        << ",\"l_md\":" << format_value(r.loss.l_md) << ",\"l_m\":" << format_value(r.loss.l_m)
        << ",\"seconds\":" << format_value(r.seconds)
        << ",\"masked_points\":" << r.loss.masked_points << "}\n";
  }
}

}  // namespace f2v
