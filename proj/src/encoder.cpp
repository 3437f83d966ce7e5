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

#include "flight2vec/encoder.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "flight2vec/errors.hpp"

namespace f2v {

namespace {

std::atomic<std::uint64_t> g_attention_flops{0};

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// y = (x - mean) * rstd * gamma + beta, per row; stats cached for backward.
void layernorm_forward(const Matrix& x, const double* gamma, const double* beta, double eps,
                       Matrix& out, std::vector<double>& mean, std::vector<double>& rstd) {
  const int rows = x.rows, d = x.cols;
  out = Matrix(rows, d);
  mean.assign(rows, 0.0);
  rstd.assign(rows, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    const double* xi = x.row(i);
    double m = 0.0;
    for (int j = 0; j < d; ++j) m += xi[j];
    m /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = xi[j] - m;
      var += c * c;
    }
    var /= d;
    const double r = 1.0 / std::sqrt(var + eps);
    mean[i] = m;
    rstd[i] = r;
    double* oi = out.row(i);
    for (int j = 0; j < d; ++j) oi[j] = (xi[j] - m) * r * gamma[j] + beta[j];
  }
}

// Accumulates dgamma/dbeta and returns dx (added into dx_acc).
void layernorm_backward(const Matrix& x, const std::vector<double>& mean,
                        const std::vector<double>& rstd, const double* gamma, const Matrix& dy,
                        double* dgamma, double* dbeta, Matrix& dx_acc) {
  const int rows = x.rows, d = x.cols;
  // Parameter grads: serial over rows for a deterministic accumulation order.
  for (int i = 0; i < rows; ++i) {
    const double* xi = x.row(i);
    const double* dyi = dy.row(i);
    const double m = mean[i], r = rstd[i];
    for (int j = 0; j < d; ++j) {
      const double xhat = (xi[j] - m) * r;
      dgamma[j] += dyi[j] * xhat;
      dbeta[j] += dyi[j];
    }
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) {
    const double* xi = x.row(i);
    const double* dyi = dy.row(i);
    double* dxi = dx_acc.row(i);
    const double m = mean[i], r = rstd[i];
    double m1 = 0.0, m2 = 0.0;
    for (int j = 0; j < d; ++j) {
      const double xhat = (xi[j] - m) * r;
      const double dxhat = dyi[j] * gamma[j];
      m1 += dxhat;
      m2 += dxhat * xhat;
    }
    m1 /= d;
    m2 /= d;
    for (int j = 0; j < d; ++j) {
      const double xhat = (xi[j] - m) * r;
      const double dxhat = dyi[j] * gamma[j];
      dxi[j] += r * (dxhat - m1 - xhat * m2);
    }
  }
}

// out = x * W^T + b
void linear_forward(const Matrix& x, CMatView w, const double* b, Matrix& out) {
  out = Matrix(x.rows, w.rows);
  matmul_nt(x, w, out);
  if (b != nullptr) add_row_vector(out, b);
}

// dx += dout * W ; dW += dout^T * x ; db += colsum(dout)
void linear_backward(const Matrix& x, CMatView w, const Matrix& dout, Matrix* dx_acc, MatView dw,
                     double* db) {
  if (dx_acc != nullptr) {
    Matrix tmp(dout.rows, w.cols);
    matmul_nn(dout, w, tmp);
    for (std::size_t i = 0; i < tmp.data.size(); ++i) dx_acc->data[i] += tmp.data[i];
  }
  matmul_tn_acc(dout, x, dw);
  if (db != nullptr) col_sum_acc(dout, db);
}

Matrix make_dropout_mask(int rows, int cols, double p, SplitMix64& rng) {
  Matrix m(rows, cols);
  const double keep = 1.0 - p;
  const double scale = 1.0 / keep;
  for (double& v : m.data) v = rng.uniform01() < keep ? scale : 0.0;
  return m;
}

void apply_dropout(const Matrix& mask, Matrix& x) {
  if (mask.data.empty()) return;
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] *= mask.data[i];
}

}  // namespace

void EncoderConfig::validate() const {
  if (patch_len < 2 || feat_dim < 1 || num_patches < 1) {
    throw ConfigError("encoder: invalid patch geometry");
  }
  if (d_model < 1 || n_layers < 1 || n_heads < 1 || d_ff < 1) {
    throw ConfigError("encoder: invalid transformer dimensions");
  }
  if (d_model % n_heads != 0) throw ConfigError("encoder: d_model must be divisible by n_heads");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must lie in [0, 1)");
}

Model Model::create(const EncoderConfig& cfg, const PatchingConfig& patching,
                    const NormStats& stats, std::uint64_t seed) {
  cfg.validate();
  patching.validate();
  if (cfg.patch_len != patching.patch_len || cfg.num_patches != patching.num_patches) {
    throw ConfigError("encoder and patching configs disagree on S or N");
  }

  Model m;
  m.cfg = cfg;
  m.patching = patching;
  m.stats = stats;

  const int d = cfg.d_model;
  const int f = cfg.flat_dim();
  ParamStore& ps = m.params;
  m.w_p = ps.add("w_p", d, f);
  m.w_pos = ps.add("w_pos", cfg.num_patches, d);
  m.mask_token = ps.add("mask_token", 1, d);
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerBlocks lb;
    lb.ln1_g = ps.add(p + "ln1_gamma", 1, d);
    lb.ln1_b = ps.add(p + "ln1_beta", 1, d);
    lb.w_q = ps.add(p + "w_q", d, d);
    lb.b_q = ps.add(p + "b_q", 1, d);
    lb.w_k = ps.add(p + "w_k", d, d);
    lb.b_k = ps.add(p + "b_k", 1, d);
    lb.w_v = ps.add(p + "w_v", d, d);
    lb.b_v = ps.add(p + "b_v", 1, d);
    lb.w_o = ps.add(p + "w_o", d, d);
    lb.b_o = ps.add(p + "b_o", 1, d);
    lb.ln2_g = ps.add(p + "ln2_gamma", 1, d);
    lb.ln2_b = ps.add(p + "ln2_beta", 1, d);
    lb.w_ff1 = ps.add(p + "w_ff1", cfg.d_ff, d);
    lb.b_ff1 = ps.add(p + "b_ff1", 1, cfg.d_ff);
    lb.w_ff2 = ps.add(p + "w_ff2", d, cfg.d_ff);
    lb.b_ff2 = ps.add(p + "b_ff2", 1, d);
    m.layers.push_back(lb);
  }
  m.lnf_g = ps.add("lnf_gamma", 1, d);
  m.lnf_b = ps.add("lnf_beta", 1, d);
  m.w_recon = ps.add("w_recon", f, d);
  m.b_recon = ps.add("b_recon", 1, f);
  m.w_dir = ps.add("w_dir", cfg.patch_len * 26, d);
  m.b_dir = ps.add("b_dir", 1, cfg.patch_len * 26);

  SplitMix64 rng(derive_seed(seed, {0x696e6974}));
  auto uniform_init = [&](int id, double bound) {
    MatView v = m.params.mat(id);
    for (int i = 0; i < v.rows; ++i)
      for (int j = 0; j < v.cols; ++j) v(i, j) = rng.uniform(-bound, bound);
  };
  auto normal_init = [&](int id, double std) {
    MatView v = m.params.mat(id);
    for (int i = 0; i < v.rows; ++i)
      for (int j = 0; j < v.cols; ++j) v(i, j) = rng.normal(0.0, std);
  };
  auto ones = [&](int id) {
    MatView v = m.params.mat(id);
    for (int i = 0; i < v.rows; ++i)
      for (int j = 0; j < v.cols; ++j) v(i, j) = 1.0;
  };

  uniform_init(m.w_p, 1.0 / std::sqrt(static_cast<double>(f)));
  normal_init(m.w_pos, 0.02);
  normal_init(m.mask_token, 0.02);
  const double ad = 1.0 / std::sqrt(static_cast<double>(d));
  for (const LayerBlocks& lb : m.layers) {
    ones(lb.ln1_g);
    uniform_init(lb.w_q, ad);
    uniform_init(lb.w_k, ad);
    uniform_init(lb.w_v, ad);
    uniform_init(lb.w_o, ad);
    ones(lb.ln2_g);
    uniform_init(lb.w_ff1, ad);
    uniform_init(lb.w_ff2, 1.0 / std::sqrt(static_cast<double>(cfg.d_ff)));
  }
  ones(m.lnf_g);
  uniform_init(m.w_recon, ad);
  uniform_init(m.w_dir, ad);
  return m;
}

Matrix embed_batch(const Model& m, const Matrix& patch_values, const std::vector<char>& masked) {
  const int N = m.cfg.num_patches;
  const int f = m.cfg.flat_dim();
  if (patch_values.cols != f || patch_values.rows % N != 0) {
    throw ShapeError("embed: patch matrix must be (batch*N) x flat_dim");
  }
  if (!masked.empty() && static_cast<int>(masked.size()) != patch_values.rows) {
    throw ShapeError("embed: mask length mismatch");
  }

  Matrix y(patch_values.rows, m.cfg.d_model);
  matmul_nt(patch_values, m.params.mat(m.w_p), y);

  const CMatView token = m.params.mat(m.mask_token);
  const CMatView pos = m.params.mat(m.w_pos);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < y.rows; ++i) {
    double* yi = y.row(i);
    if (!masked.empty() && masked[i]) {
      // Masked patches contribute no content: projection is replaced by the
      // learned token, so the encoder never sees the hidden values.
      for (int j = 0; j < y.cols; ++j) yi[j] = token(0, j);
    }
    const double* p = pos.row(i % N);
    for (int j = 0; j < y.cols; ++j) yi[j] += p[j];
  }
  return y;
}

Matrix embed_patches(const Model& m, const PatchSequence& ps) {
  if (static_cast<int>(ps.patches.size()) != m.cfg.num_patches) {
    throw ShapeError("embed_patches: expected " + std::to_string(m.cfg.num_patches) +
                     " patches, got " + std::to_string(ps.patches.size()));
  }
  return embed_batch(m, normalized_patch_matrix(m, ps), {});
}

void transformer_forward(const Model& m, const Matrix& y0, int batch, bool training,
                         SplitMix64* dropout_rng, EncodeActs& acts) {
  const EncoderConfig& cfg = m.cfg;
  if (batch < 1 || y0.rows % batch != 0 || y0.cols != cfg.d_model) {
    throw ShapeError("transformer: input must be (batch*N) x d_model");
  }
  if (!all_finite(y0)) throw NumericError("transformer: non-finite input");

  const int rows = y0.rows;
  const int N = rows / batch;
  const int d = cfg.d_model;
  const int H = cfg.n_heads;
  const int dk = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  const bool use_dropout = training && cfg.dropout > 0.0 && dropout_rng != nullptr;

  acts.batch = batch;
  acts.layers.assign(cfg.n_layers, LayerActs{});

  const Matrix* x = &y0;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const LayerBlocks& lb = m.layers[l];
    LayerActs& a = acts.layers[l];

    layernorm_forward(*x, m.params.row(lb.ln1_g, 0), m.params.row(lb.ln1_b, 0), cfg.ln_eps,
                      a.ln1_out, a.ln1_mean, a.ln1_rstd);
    linear_forward(a.ln1_out, m.params.mat(lb.w_q), m.params.row(lb.b_q, 0), a.q);
    linear_forward(a.ln1_out, m.params.mat(lb.w_k), m.params.row(lb.b_k, 0), a.k);
    linear_forward(a.ln1_out, m.params.mat(lb.w_v), m.params.row(lb.b_v, 0), a.v);

    a.attn_w = Matrix(batch * H * N, N);
    a.ctx = Matrix(rows, d);
#pragma omp parallel for schedule(static)
    for (int bh = 0; bh < batch * H; ++bh) {
      const int b = bh / H;
      const int h = bh % H;
      const int r0 = b * N;
      const int c0 = h * dk;
      const int w0 = bh * N;
      for (int i = 0; i < N; ++i) {
        double* wr = a.attn_w.row(w0 + i);
        const double* qi = a.q.row(r0 + i) + c0;
        for (int j = 0; j < N; ++j) {
          const double* kj = a.k.row(r0 + j) + c0;
          double s = 0.0;
          for (int c = 0; c < dk; ++c) s += qi[c] * kj[c];
          wr[j] = s * scale;
        }
        // softmax row
        double mx = wr[0];
        for (int j = 1; j < N; ++j) mx = std::max(mx, wr[j]);
        double sum = 0.0;
        for (int j = 0; j < N; ++j) {
          wr[j] = std::exp(wr[j] - mx);
          sum += wr[j];
        }
        const double inv = 1.0 / sum;
        for (int j = 0; j < N; ++j) wr[j] *= inv;
        double* ci = a.ctx.row(r0 + i) + c0;
        for (int c = 0; c < dk; ++c) {
          double s = 0.0;
          for (int j = 0; j < N; ++j) s += wr[j] * a.v(r0 + j, c0 + c);
          ci[c] = s;
        }
      }
    }
    g_attention_flops.fetch_add(4ull * static_cast<std::uint64_t>(batch) * N * N * d,
                                std::memory_order_relaxed);

    linear_forward(a.ctx, m.params.mat(lb.w_o), m.params.row(lb.b_o, 0), a.attn_out);
    Matrix attn_dropped = a.attn_out;
    if (use_dropout) {
      a.drop1 = make_dropout_mask(rows, d, cfg.dropout, *dropout_rng);
      apply_dropout(a.drop1, attn_dropped);
    }
    a.x_mid = *x;
    for (std::size_t i = 0; i < a.x_mid.data.size(); ++i) a.x_mid.data[i] += attn_dropped.data[i];

    layernorm_forward(a.x_mid, m.params.row(lb.ln2_g, 0), m.params.row(lb.ln2_b, 0), cfg.ln_eps,
                      a.ln2_out, a.ln2_mean, a.ln2_rstd);
    linear_forward(a.ln2_out, m.params.mat(lb.w_ff1), m.params.row(lb.b_ff1, 0), a.ff_h);
    a.ff_g = a.ff_h;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.ff_g.rows; ++i) {
      double* r = a.ff_g.row(i);
      for (int j = 0; j < a.ff_g.cols; ++j) r[j] = gelu(r[j]);
    }
    linear_forward(a.ff_g, m.params.mat(lb.w_ff2), m.params.row(lb.b_ff2, 0), a.ff_out);
    Matrix ff_dropped = a.ff_out;
    if (use_dropout) {
      a.drop2 = make_dropout_mask(rows, d, cfg.dropout, *dropout_rng);
      apply_dropout(a.drop2, ff_dropped);
    }
    a.x_out = a.x_mid;
    for (std::size_t i = 0; i < a.x_out.data.size(); ++i) a.x_out.data[i] += ff_dropped.data[i];
    x = &a.x_out;
  }

  layernorm_forward(*x, m.params.row(m.lnf_g, 0), m.params.row(m.lnf_b, 0), cfg.ln_eps, acts.z,
                    acts.lnf_mean, acts.lnf_rstd);
}

void transformer_backward(const Model& m, const Matrix& y0, const EncodeActs& acts,
                          const Matrix& dZ, int batch, std::vector<double>& grad, Matrix* dY0) {
  const EncoderConfig& cfg = m.cfg;
  const int rows = y0.rows;
  const int N = rows / batch;
  const int d = cfg.d_model;
  const int H = cfg.n_heads;
  const int dk = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  const ParamStore& ps = m.params;

  auto gmat = [&](int id) { return ps.mat_in(grad, id); };
  auto grow = [&](int id) { return ps.mat_in(grad, id).row(0); };

  // Final layer norm.
  const Matrix& x_last = acts.layers.empty() ? y0 : acts.layers.back().x_out;
  Matrix dx(rows, d);
  layernorm_backward(x_last, acts.lnf_mean, acts.lnf_rstd, ps.row(m.lnf_g, 0), dZ, grow(m.lnf_g),
                     grow(m.lnf_b), dx);

  for (int l = cfg.n_layers - 1; l >= 0; --l) {
    const LayerBlocks& lb = m.layers[l];
    const LayerActs& a = acts.layers[l];
    const Matrix& x_in = l == 0 ? y0 : acts.layers[l - 1].x_out;

    // Second residual: x_out = x_mid + drop2(ff_out).
    Matrix dff_out = dx;
    apply_dropout(a.drop2, dff_out);
    Matrix dx_mid = dx;  // identity branch

    // FFN backward.
    Matrix dg(rows, cfg.d_ff);
    matmul_nn(dff_out, ps.mat(lb.w_ff2), dg);
    matmul_tn_acc(dff_out, a.ff_g, gmat(lb.w_ff2));
    col_sum_acc(dff_out, grow(lb.b_ff2));
    Matrix dh = dg;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < dh.rows; ++i) {
      double* r = dh.row(i);
      const double* hr = a.ff_h.row(i);
      for (int j = 0; j < dh.cols; ++j) r[j] *= gelu_grad(hr[j]);
    }
    Matrix dln2(rows, d);
    matmul_nn(dh, ps.mat(lb.w_ff1), dln2);
    matmul_tn_acc(dh, a.ln2_out, gmat(lb.w_ff1));
    col_sum_acc(dh, grow(lb.b_ff1));
    layernorm_backward(a.x_mid, a.ln2_mean, a.ln2_rstd, ps.row(lb.ln2_g, 0), dln2,
                       grow(lb.ln2_g), grow(lb.ln2_b), dx_mid);

    // First residual: x_mid = x_in + drop1(attn_out).
    Matrix dattn_out = dx_mid;
    apply_dropout(a.drop1, dattn_out);
    dx = dx_mid;  // identity branch into the trunk

    Matrix dctx(rows, d);
    matmul_nn(dattn_out, ps.mat(lb.w_o), dctx);
    matmul_tn_acc(dattn_out, a.ctx, gmat(lb.w_o));
    col_sum_acc(dattn_out, grow(lb.b_o));

    Matrix dq(rows, d), dkm(rows, d), dv(rows, d);
#pragma omp parallel for schedule(static)
    for (int bh = 0; bh < batch * H; ++bh) {
      const int b = bh / H;
      const int h = bh % H;
      const int r0 = b * N;
      const int c0 = h * dk;
      const int w0 = bh * N;
      std::vector<double> dw(N), dsc(N);
      for (int i = 0; i < N; ++i) {
        const double* wr = a.attn_w.row(w0 + i);
        const double* dci = dctx.row(r0 + i) + c0;
        // dV and dW from ctx = W * V.
        for (int j = 0; j < N; ++j) {
          const double* vj = a.v.row(r0 + j) + c0;
          double s = 0.0;
          for (int c = 0; c < dk; ++c) s += dci[c] * vj[c];
          dw[j] = s;
        }
        // softmax backward.
        double dot = 0.0;
        for (int j = 0; j < N; ++j) dot += dw[j] * wr[j];
        for (int j = 0; j < N; ++j) dsc[j] = wr[j] * (dw[j] - dot) * scale;
        double* dqi = dq.row(r0 + i) + c0;
        for (int c = 0; c < dk; ++c) {
          double s = 0.0;
          for (int j = 0; j < N; ++j) s += dsc[j] * a.k(r0 + j, c0 + c);
          dqi[c] = s;
        }
        const double* qi = a.q.row(r0 + i) + c0;
        for (int j = 0; j < N; ++j) {
          double* dkj = dkm.row(r0 + j) + c0;
          double* dvj = dv.row(r0 + j) + c0;
          for (int c = 0; c < dk; ++c) {
            dkj[c] += dsc[j] * qi[c];
            dvj[c] += wr[j] * dci[c];
          }
        }
      }
    }

    Matrix dA(rows, d);
    {
      Matrix tmp(rows, d);
      matmul_nn(dq, ps.mat(lb.w_q), dA);
      matmul_nn(dkm, ps.mat(lb.w_k), tmp);
      for (std::size_t i = 0; i < dA.data.size(); ++i) dA.data[i] += tmp.data[i];
      matmul_nn(dv, ps.mat(lb.w_v), tmp);
      for (std::size_t i = 0; i < dA.data.size(); ++i) dA.data[i] += tmp.data[i];
    }
    matmul_tn_acc(dq, a.ln1_out, gmat(lb.w_q));
    col_sum_acc(dq, grow(lb.b_q));
    matmul_tn_acc(dkm, a.ln1_out, gmat(lb.w_k));
    col_sum_acc(dkm, grow(lb.b_k));
    matmul_tn_acc(dv, a.ln1_out, gmat(lb.w_v));
    col_sum_acc(dv, grow(lb.b_v));

    layernorm_backward(x_in, a.ln1_mean, a.ln1_rstd, ps.row(lb.ln1_g, 0), dA, grow(lb.ln1_g),
                       grow(lb.ln1_b), dx);
  }

  if (dY0 != nullptr) *dY0 = std::move(dx);
}

void embed_backward(const Model& m, const Matrix& patch_values, const std::vector<char>& masked,
                    const Matrix& dY0, std::vector<double>& grad) {
  const int N = m.cfg.num_patches;
  const ParamStore& ps = m.params;
  MatView dpos = ps.mat_in(grad, m.w_pos);
  MatView dtoken = ps.mat_in(grad, m.mask_token);

  Matrix dproj = dY0;  // rows that used the mask token contribute nothing to W_p
  for (int i = 0; i < dY0.rows; ++i) {
    const double* di = dY0.row(i);
    double* dp = dpos.row(i % N);
    for (int j = 0; j < dY0.cols; ++j) dp[j] += di[j];
    if (!masked.empty() && masked[i]) {
      double* dt = dtoken.row(0);
      for (int j = 0; j < dY0.cols; ++j) dt[j] += di[j];
      double* zr = dproj.row(i);
      for (int j = 0; j < dY0.cols; ++j) zr[j] = 0.0;
    }
  }
  matmul_tn_acc(dproj, patch_values, ps.mat_in(grad, m.w_p));
}

Matrix encode(const Model& m, const Matrix& y) {
  EncodeActs acts;
  transformer_forward(m, y, 1, false, nullptr, acts);
  return std::move(acts.z);
}

std::vector<double> pool_representation(CMatView contextual) {
  if (contextual.rows < 1) throw PreconditionError("pool: need at least one patch row");
  std::vector<double> v(contextual.cols, 0.0);
  for (int i = 0; i < contextual.rows; ++i) {
    const double* r = contextual.row(i);
    for (int j = 0; j < contextual.cols; ++j) v[j] += r[j];
  }
  for (double& x : v) x /= contextual.rows;
  return v;
}

std::uint64_t attention_flops() { return g_attention_flops.load(std::memory_order_relaxed); }
void reset_attention_flops() { g_attention_flops.store(0, std::memory_order_relaxed); }

Matrix normalized_patch_matrix(const Model& m, const PatchSequence& ps) {
  const int f = m.cfg.flat_dim();
  Matrix out(static_cast<int>(ps.patches.size()), f);
  for (std::size_t i = 0; i < ps.patches.size(); ++i) {
    const Patch& p = ps.patches[i];
    if (static_cast<int>(p.values.size()) != f) throw ShapeError("patch value size mismatch");
    double* r = out.row(static_cast<int>(i));
    for (int k = 0; k < f; ++k) {
      r[k] = normalize_feature(p.values[k], k % kFeatureCount, m.stats);
    }
  }
  return out;
}

TrajectoryEmbedding embed_trajectory(const Model& m, const Trajectory& traj) {
  TrajectoryEmbedding out;
  PatchingOutcome po = patch_trajectory(traj, m.patching);
  out.patches = std::move(po.patches);
  const Matrix y = embed_batch(m, normalized_patch_matrix(m, out.patches), {});
  EncodeActs acts;
  transformer_forward(m, y, 1, false, nullptr, acts);
  out.contextual = std::move(acts.z);
  out.pooled = pool_representation(out.contextual);
  const double* last = out.contextual.row(out.contextual.rows - 1);
  out.last_patch.assign(last, last + out.contextual.cols);
  return out;
}

}  // namespace f2v
