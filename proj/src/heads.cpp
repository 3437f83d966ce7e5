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

#include "flight2vec/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "flight2vec/errors.hpp"
#include "flight2vec/pretrain.hpp"

namespace f2v {

namespace {

void uniform_fill(ParamStore& ps, int id, double bound, SplitMix64& rng) {
  MatView v = ps.mat(id);
  for (int i = 0; i < v.rows; ++i)
    for (int j = 0; j < v.cols; ++j) v(i, j) = rng.uniform(-bound, bound);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> softmax_vec(std::vector<double> v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double z = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double& x : v) x /= z;
  return v;
}

}  // namespace

FtpHead FtpHead::create(int h_max, int d_model, std::uint64_t seed) {
  if (h_max < 1 || d_model < 1) throw ConfigError("ftp head: h_max and d_model must be >= 1");
  FtpHead head;
  head.h_max = h_max;
  head.d_model = d_model;
  head.w = head.params.add("w", h_max * 3, 2 * d_model);
  head.b = head.params.add("b", 1, h_max * 3);
  SplitMix64 rng(derive_seed(seed, {0x667470}));
  uniform_fill(head.params, head.w, 1.0 / std::sqrt(2.0 * d_model), rng);
  return head;
}

MlpHead MlpHead::create(int in_dim, int hidden, int out_dim, std::uint64_t seed) {
  if (in_dim < 1 || hidden < 1 || out_dim < 1) throw ConfigError("mlp head: bad dimensions");
  MlpHead h;
  h.in_dim = in_dim;
  h.hidden = hidden;
  h.out_dim = out_dim;
  h.w1 = h.params.add("w1", hidden, in_dim);
  h.b1 = h.params.add("b1", 1, hidden);
  h.w2 = h.params.add("w2", out_dim, hidden);
  h.b2 = h.params.add("b2", 1, out_dim);
  SplitMix64 rng(derive_seed(seed, {0x6d6c70}));
  uniform_fill(h.params, h.w1, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng);
  uniform_fill(h.params, h.w2, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  return h;
}

std::vector<double> MlpHead::forward(const double* x) const {
  const CMatView w1v = params.mat(w1);
  const double* b1v = params.row(b1, 0);
  std::vector<double> h(hidden);
  for (int i = 0; i < hidden; ++i) {
    double s = b1v[i];
    const double* wr = w1v.row(i);
    for (int j = 0; j < in_dim; ++j) s += wr[j] * x[j];
    h[i] = std::tanh(s);
  }
  const CMatView w2v = params.mat(w2);
  const double* b2v = params.row(b2, 0);
  std::vector<double> out(out_dim);
  for (int i = 0; i < out_dim; ++i) {
    double s = b2v[i];
    const double* wr = w2v.row(i);
    for (int j = 0; j < hidden; ++j) s += wr[j] * h[j];
    out[i] = s;
  }
  return out;
}

FrHead FrHead::create(std::vector<std::string> classes, int d_model, int hidden,
                      std::uint64_t seed) {
  if (classes.size() < 2) throw ConfigError("fr head: need at least 2 classes");
  FrHead head;
  head.classes = std::move(classes);
  head.mlp = MlpHead::create(d_model, hidden, static_cast<int>(head.classes.size()), seed);
  return head;
}

AdHead AdHead::create(int d_model, int hidden, std::uint64_t seed) {
  AdHead head;
  head.mlp = MlpHead::create(d_model, hidden, 1, seed);
  return head;
}

std::map<int, std::array<double, 3>> predict_trajectory(const Model& model, const FtpHead& head,
                                                        const Trajectory& history,
                                                        const std::vector<int>& horizons) {
  for (int h : horizons) {
    if (h < 1 || h > head.h_max) {
      throw std::out_of_range("horizon " + std::to_string(h) + " outside [1, " +
                              std::to_string(head.h_max) + "]");
    }
  }
  const TrajectoryEmbedding emb = embed_trajectory(model, history);
  std::vector<double> x = emb.pooled;
  x.insert(x.end(), emb.last_patch.begin(), emb.last_patch.end());

  const CMatView w = head.params.mat(head.w);
  const double* b = head.params.row(head.b, 0);
  std::map<int, std::array<double, 3>> out;
  for (int h : horizons) {
    std::array<double, 3> pos{};
    for (int j = 0; j < 3; ++j) {
      const int r = (h - 1) * 3 + j;
      double s = b[r];
      const double* wr = w.row(r);
      for (int c = 0; c < head.in_dim(); ++c) s += wr[c] * x[c];
      pos[j] = denormalize_feature(s, j, model.stats);  // features 0..2 are lon/lat/alt
    }
    out[h] = pos;
  }
  return out;
}

std::vector<double> classify_flight(const Model& model, const FrHead& head,
                                    const Trajectory& traj) {
  const TrajectoryEmbedding emb = embed_trajectory(model, traj);
  return softmax_vec(head.mlp.forward(emb.pooled.data()));
}

double score_anomaly(const Model& model, const AdHead& head, const Trajectory& traj) {
  const TrajectoryEmbedding emb = embed_trajectory(model, traj);
  return sigmoid(head.mlp.forward(emb.pooled.data())[0]);
}

// --- training -------------------------------------------------------------

namespace {

struct EncodedSample {
  Matrix patch_values;           // N x flat_dim (kept for fine-tuning)
  std::vector<double> pooled;
  std::vector<double> last;
};

bool try_encode(const Model& model, const Trajectory& traj, EncodedSample& out) {
  try {
    const PatchingOutcome po = patch_trajectory(traj, model.patching);
    out.patch_values = normalized_patch_matrix(model, po.patches);
  } catch (const Error&) {
    return false;
  }
  const Matrix y0 = embed_batch(model, out.patch_values, {});
  EncodeActs acts;
  transformer_forward(model, y0, 1, false, nullptr, acts);
  out.pooled = pool_representation(acts.z);
  const double* last = acts.z.row(acts.z.rows - 1);
  out.last.assign(last, last + acts.z.cols);
  return true;
}

// Recomputes the forward pass for one sample and backpropagates head-input
// gradients (d pooled, d last-patch row) into the encoder parameter grads.
void encoder_backward_from_embedding(const Model& model, const Matrix& patch_values,
                                     const std::vector<double>& dpooled,
                                     const std::vector<double>& dlast,
                                     std::vector<double>& grad) {
  const Matrix y0 = embed_batch(model, patch_values, {});
  EncodeActs acts;
  transformer_forward(model, y0, 1, false, nullptr, acts);
  const int n = acts.z.rows;
  Matrix dZ(n, acts.z.cols);
  for (int i = 0; i < n; ++i) {
    double* r = dZ.row(i);
    if (!dpooled.empty()) {
      for (int j = 0; j < dZ.cols; ++j) r[j] += dpooled[j] / n;
    }
    if (i == n - 1 && !dlast.empty()) {
      for (int j = 0; j < dZ.cols; ++j) r[j] += dlast[j];
    }
  }
  Matrix dY0;
  transformer_backward(model, y0, acts, dZ, 1, grad, &dY0);
  embed_backward(model, patch_values, {}, dY0, grad);
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(derive_seed(seed, {0x68656164, static_cast<std::uint64_t>(epoch)}));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
  return order;
}

}  // namespace

HeadTrainResult train_ftp_head(Model& model, FtpHead& head,
                               const std::vector<Trajectory>& dataset,
                               const HeadTrainConfig& config) {
  if (head.d_model != model.cfg.d_model) throw ConfigError("ftp head/model dimension mismatch");
  const int h_max = head.h_max;
  const int out_dim = h_max * 3;

  struct Item {
    EncodedSample enc;
    std::vector<double> target;  // h_max * 3 normalized positions
    Trajectory history;          // only used when fine-tuning
  };
  std::vector<Item> items;
  HeadTrainResult result;
  for (const Trajectory& t : dataset) {
    const int n = static_cast<int>(t.points.size());
    if (n <= h_max + 2) {
      ++result.samples_skipped;
      continue;
    }
    Trajectory history;
    history.id = t.id;
    history.points.assign(t.points.begin(), t.points.end() - h_max);
    Item item;
    if (!try_encode(model, history, item.enc)) {
      ++result.samples_skipped;
      continue;
    }
    item.target.resize(out_dim);
    for (int h = 0; h < h_max; ++h) {
      const TrajectoryPoint& p = t.points[n - h_max + h];
      item.target[h * 3 + 0] = normalize_feature(p.lon, kLon, model.stats);
      item.target[h * 3 + 1] = normalize_feature(p.lat, kLat, model.stats);
      item.target[h * 3 + 2] = normalize_feature(p.alt, kAlt, model.stats);
    }
    items.push_back(std::move(item));
  }
  result.samples_used = items.size();
  if (items.empty()) throw PreconditionError("train_ftp_head: no usable trajectories");

  AdamW opt(head.params.size(), config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay);
  AdamW enc_opt(model.params.size(), config.encoder_learning_rate, 0.9, 0.999, 1e-8, 0.0);
  std::vector<double> grad(head.params.size(), 0.0);
  std::vector<double> enc_grad;
  const int in_dim = head.in_dim();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffled_order(items.size(), config.seed, epoch);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += config.batch_size) {
      const std::size_t end = std::min(order.size(), pos + config.batch_size);
      const int B = static_cast<int>(end - pos);
      Matrix x(B, in_dim), y(B, out_dim);
      for (int s = 0; s < B; ++s) {
        const Item& item = items[order[pos + s]];
        std::copy(item.enc.pooled.begin(), item.enc.pooled.end(), x.row(s));
        std::copy(item.enc.last.begin(), item.enc.last.end(), x.row(s) + model.cfg.d_model);
        std::copy(item.target.begin(), item.target.end(), y.row(s));
      }
      Matrix pred(B, out_dim);
      matmul_nt(x, head.params.mat(head.w), pred);
      add_row_vector(pred, head.params.row(head.b, 0));

      double loss = 0.0;
      Matrix dpred(B, out_dim);
      const double scale = 1.0 / (static_cast<double>(B) * out_dim);
      for (int s = 0; s < B; ++s) {
        for (int j = 0; j < out_dim; ++j) {
          const double diff = pred(s, j) - y(s, j);
          loss += diff * diff * scale;
          dpred(s, j) = 2.0 * diff * scale;
        }
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      matmul_tn_acc(dpred, x, head.params.mat_in(grad, head.w));
      col_sum_acc(dpred, head.params.mat_in(grad, head.b).row(0));

      if (!config.freeze_encoder) {
        enc_grad.assign(model.params.size(), 0.0);
        Matrix dx(B, in_dim);
        matmul_nn(dpred, head.params.mat(head.w), dx);
        for (int s = 0; s < B; ++s) {
          const Item& item = items[order[pos + s]];
          std::vector<double> dpooled(dx.row(s), dx.row(s) + model.cfg.d_model);
          std::vector<double> dlast(dx.row(s) + model.cfg.d_model, dx.row(s) + in_dim);
          encoder_backward_from_embedding(model, item.enc.patch_values, dpooled, dlast, enc_grad);
        }
        enc_opt.step(model.params.values(), enc_grad);
      }
      opt.step(head.params.values(), grad);
      epoch_loss += loss;
      ++batches;
    }
    result.loss_curve.push_back(epoch_loss / batches);
    if (!config.freeze_encoder) {
      // Encoder moved: refresh the cached embeddings.
      for (Item& item : items) {
        EncodedSample enc;
        enc.patch_values = std::move(item.enc.patch_values);
        const Matrix y0 = embed_batch(model, enc.patch_values, {});
        EncodeActs acts;
        transformer_forward(model, y0, 1, false, nullptr, acts);
        enc.pooled = pool_representation(acts.z);
        const double* last = acts.z.row(acts.z.rows - 1);
        enc.last.assign(last, last + acts.z.cols);
        item.enc = std::move(enc);
      }
    }
  }
  return result;
}

namespace {

struct MlpBatchGrads {
  Matrix dx;  // B x in_dim, for fine-tuning
};

// Generic MLP training step: given inputs and dlogits, accumulate grads.
void mlp_backward(const MlpHead& mlp, const Matrix& x, const Matrix& hidden_act,
                  const Matrix& dlogits, std::vector<double>& grad, Matrix* dx) {
  Matrix dh(x.rows, mlp.hidden);
  matmul_nn(dlogits, mlp.params.mat(mlp.w2), dh);
  for (int i = 0; i < dh.rows; ++i) {
    double* r = dh.row(i);
    const double* h = hidden_act.row(i);
    for (int j = 0; j < dh.cols; ++j) r[j] *= 1.0 - h[j] * h[j];
  }
  matmul_tn_acc(dlogits, hidden_act, mlp.params.mat_in(grad, mlp.w2));
  col_sum_acc(dlogits, mlp.params.mat_in(grad, mlp.b2).row(0));
  matmul_tn_acc(dh, x, mlp.params.mat_in(grad, mlp.w1));
  col_sum_acc(dh, mlp.params.mat_in(grad, mlp.b1).row(0));
  if (dx != nullptr) {
    *dx = Matrix(x.rows, mlp.in_dim);
    matmul_nn(dh, mlp.params.mat(mlp.w1), *dx);
  }
}

void mlp_forward_batch(const MlpHead& mlp, const Matrix& x, Matrix& hidden_act, Matrix& logits) {
  hidden_act = Matrix(x.rows, mlp.hidden);
  matmul_nt(x, mlp.params.mat(mlp.w1), hidden_act);
  add_row_vector(hidden_act, mlp.params.row(mlp.b1, 0));
  for (double& v : hidden_act.data) v = std::tanh(v);
  logits = Matrix(x.rows, mlp.out_dim);
  matmul_nt(hidden_act, mlp.params.mat(mlp.w2), logits);
  add_row_vector(logits, mlp.params.row(mlp.b2, 0));
}

struct PooledItem {
  EncodedSample enc;
  int label = 0;       // class index (FR) or 0/1 (AD)
};

// Shared skeleton for FR and AD training over pooled embeddings.
template <typename LossFn>
HeadTrainResult train_mlp_on_pooled(Model& model, MlpHead& mlp, std::vector<PooledItem>& items,
                                    const HeadTrainConfig& config, LossFn&& loss_fn) {
  AdamW opt(mlp.params.size(), config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay);
  AdamW enc_opt(model.params.size(), config.encoder_learning_rate, 0.9, 0.999, 1e-8, 0.0);
  std::vector<double> grad(mlp.params.size(), 0.0);
  std::vector<double> enc_grad;

  HeadTrainResult result;
  result.samples_used = items.size();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffled_order(items.size(), config.seed, epoch);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += config.batch_size) {
      const std::size_t end = std::min(order.size(), pos + config.batch_size);
      const int B = static_cast<int>(end - pos);
      Matrix x(B, mlp.in_dim);
      std::vector<int> labels(B);
      for (int s = 0; s < B; ++s) {
        const PooledItem& item = items[order[pos + s]];
        std::copy(item.enc.pooled.begin(), item.enc.pooled.end(), x.row(s));
        labels[s] = item.label;
      }
      Matrix hidden, logits;
      mlp_forward_batch(mlp, x, hidden, logits);
      Matrix dlogits(B, mlp.out_dim);
      const double loss = loss_fn(logits, labels, dlogits);

      std::fill(grad.begin(), grad.end(), 0.0);
      Matrix dx;
      mlp_backward(mlp, x, hidden, dlogits, grad, config.freeze_encoder ? nullptr : &dx);
      if (!config.freeze_encoder) {
        enc_grad.assign(model.params.size(), 0.0);
        for (int s = 0; s < B; ++s) {
          const PooledItem& item = items[order[pos + s]];
          std::vector<double> dpooled(dx.row(s), dx.row(s) + mlp.in_dim);
          encoder_backward_from_embedding(model, item.enc.patch_values, dpooled, {}, enc_grad);
        }
        enc_opt.step(model.params.values(), enc_grad);
      }
      opt.step(mlp.params.values(), grad);
      epoch_loss += loss;
      ++batches;
    }
    result.loss_curve.push_back(epoch_loss / batches);
    if (!config.freeze_encoder) {
      for (PooledItem& item : items) {
        const Matrix y0 = embed_batch(model, item.enc.patch_values, {});
        EncodeActs acts;
        transformer_forward(model, y0, 1, false, nullptr, acts);
        item.enc.pooled = pool_representation(acts.z);
      }
    }
  }
  return result;
}

}  // namespace

HeadTrainResult train_fr_head(Model& model, FrHead& head,
                              const std::vector<Trajectory>& dataset,
                              const HeadTrainConfig& config) {
  std::vector<PooledItem> items;
  std::size_t skipped = 0;
  for (const Trajectory& t : dataset) {
    const auto it = std::find(head.classes.begin(), head.classes.end(), t.label);
    if (it == head.classes.end()) {
      throw ConfigError("train_fr_head: label '" + t.label + "' not in head class list");
    }
    PooledItem item;
    item.label = static_cast<int>(it - head.classes.begin());
    if (!try_encode(model, t, item.enc)) {
      ++skipped;
      continue;
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) throw PreconditionError("train_fr_head: no usable trajectories");

  HeadTrainResult result = train_mlp_on_pooled(
      model, head.mlp, items, config,
      [](const Matrix& logits, const std::vector<int>& labels, Matrix& dlogits) {
        const int B = logits.rows, K = logits.cols;
        double loss = 0.0;
        for (int s = 0; s < B; ++s) {
          const double* l = logits.row(s);
          double mx = l[0];
          for (int c = 1; c < K; ++c) mx = std::max(mx, l[c]);
          double z = 0.0;
          for (int c = 0; c < K; ++c) z += std::exp(l[c] - mx);
          loss += -(l[labels[s]] - mx - std::log(z)) / B;
          double* d = dlogits.row(s);
          for (int c = 0; c < K; ++c) d[c] = std::exp(l[c] - mx) / z / B;
          d[labels[s]] -= 1.0 / B;
        }
        return loss;
      });
  result.samples_skipped = skipped;
  return result;
}

HeadTrainResult train_ad_head(Model& model, AdHead& head,
                              const std::vector<Trajectory>& dataset,
                              const HeadTrainConfig& config) {
  std::vector<PooledItem> items;
  std::size_t skipped = 0;
  long long positives = 0;
  for (const Trajectory& t : dataset) {
    PooledItem item;
    item.label = t.anomaly_tag.empty() ? 0 : 1;
    if (!try_encode(model, t, item.enc)) {
      ++skipped;
      continue;
    }
    positives += item.label;
    items.push_back(std::move(item));
  }
  if (items.empty()) throw PreconditionError("train_ad_head: no usable trajectories");
  if (positives == 0 || positives == static_cast<long long>(items.size())) {
    throw PreconditionError("train_ad_head: need both anomalous and clean trajectories");
  }
  const double pos_weight =
      static_cast<double>(items.size() - positives) / static_cast<double>(positives);

  HeadTrainResult result = train_mlp_on_pooled(
      model, head.mlp, items, config,
      [pos_weight](const Matrix& logits, const std::vector<int>& labels, Matrix& dlogits) {
        const int B = logits.rows;
        double loss = 0.0;
        for (int s = 0; s < B; ++s) {
          const double logit = logits(s, 0);
          const double p = sigmoid(logit);
          const double w = labels[s] == 1 ? pos_weight : 1.0;
          const double eps = 1e-12;
          loss += -w * (labels[s] * std::log(p + eps) + (1 - labels[s]) * std::log(1.0 - p + eps)) / B;
          dlogits(s, 0) = w * (p - labels[s]) / B;
        }
        return loss;
      });
  result.samples_skipped = skipped;
  return result;
}

}  // namespace f2v
