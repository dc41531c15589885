// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/nn.hpp"

#include <cmath>

namespace acumen {

Mat xavier_uniform(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Mat m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Mat normal_init(int rows, int cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  Mat m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Mat sinusoidal_positions(int tokens, int dim) {
  Mat p(tokens, dim);
  for (int t = 0; t < tokens; ++t) {
    for (int i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -2.0 * (i / 2) / static_cast<double>(dim));
      p(t, i) = (i % 2 == 0) ? std::sin(t * rate) : std::cos(t * rate);
    }
  }
  return p;
}

Linear::Linear(ParamStore& ps, const std::string& prefix, int in, int out,
               std::mt19937_64& rng, bool trainable) {
  W = &ps.create(prefix + ".weight", xavier_uniform(in, out, rng), trainable);
  b = &ps.create(prefix + ".bias", Mat::Zero(1, out), trainable);
}

Var Linear::forward(Tape& t, Var x) const {
  return t.add_rowvec(t.matmul(x, t.param(*W)), t.param(*b));
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& prefix, int dim,
                     bool trainable) {
  gamma = &ps.create(prefix + ".gamma", Mat::Ones(1, dim), trainable);
  beta = &ps.create(prefix + ".beta", Mat::Zero(1, dim), trainable);
}

Var LayerNorm::forward(Tape& t, Var x) const {
  return t.layer_norm_rows(x, t.param(*gamma), t.param(*beta));
}

BatchNorm1d::BatchNorm1d(ParamStore& ps, const std::string& prefix, int dim,
                         bool trainable) {
  gamma = &ps.create(prefix + ".gamma", Mat::Ones(1, dim), trainable);
  beta = &ps.create(prefix + ".beta", Mat::Zero(1, dim), trainable);
  running_mean =
      &ps.create(prefix + ".running_mean", Mat::Zero(1, dim), false);
  running_var = &ps.create(prefix + ".running_var", Mat::Ones(1, dim), false);
}

Var BatchNorm1d::forward(Tape& t, Var x, bool training) const {
  BatchNormState st;
  st.running_mean = running_mean;
  st.running_var = running_var;
  return t.batch_norm_rows(x, t.param(*gamma), t.param(*beta), st, training);
}

MultiheadAttention::MultiheadAttention(ParamStore& ps,
                                       const std::string& prefix, int dim,
                                       int heads, std::mt19937_64& rng,
                                       bool trainable, int kv_dim)
    : heads(heads), dim(dim) {
  ACUMEN_CHECK(dim % heads == 0,
               "attention dim " << dim << " not divisible by " << heads);
  if (kv_dim < 0) kv_dim = dim;
  q = Linear(ps, prefix + ".q", dim, dim, rng, trainable);
  k = Linear(ps, prefix + ".k", kv_dim, dim, rng, trainable);
  v = Linear(ps, prefix + ".v", kv_dim, dim, rng, trainable);
  o = Linear(ps, prefix + ".o", dim, dim, rng, trainable);
}

Var MultiheadAttention::forward(Tape& t, Var query, Var memory) const {
  const int hd = dim / heads;
  Var Q = q.forward(t, query);
  Var K = k.forward(t, memory);
  Var V = v.forward(t, memory);
  std::vector<Var> outs;
  outs.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    Var Qh = t.slice_cols(Q, h * hd, hd);
    Var Kh = t.slice_cols(K, h * hd, hd);
    Var Vh = t.slice_cols(V, h * hd, hd);
    Var scores = t.scalar_mul(t.matmul_nt(Qh, Kh), 1.0 / std::sqrt(hd));
    outs.push_back(t.matmul(t.rows_softmax(scores), Vh));
  }
  return o.forward(t, heads == 1 ? outs[0] : t.concat_cols(outs));
}

Mlp::Mlp(ParamStore& ps, const std::string& prefix, int dim, int hidden,
         std::mt19937_64& rng, bool trainable) {
  fc1 = Linear(ps, prefix + ".fc1", dim, hidden, rng, trainable);
  fc2 = Linear(ps, prefix + ".fc2", hidden, dim, rng, trainable);
}

Var Mlp::forward(Tape& t, Var x) const {
  return fc2.forward(t, t.gelu(fc1.forward(t, x)));
}

EncoderBlock::EncoderBlock(ParamStore& ps, const std::string& prefix, int dim,
                           int heads, int hidden, std::mt19937_64& rng,
                           bool trainable) {
  ln1 = LayerNorm(ps, prefix + ".ln1", dim, trainable);
  attn = MultiheadAttention(ps, prefix + ".attn", dim, heads, rng, trainable);
  ln2 = LayerNorm(ps, prefix + ".ln2", dim, trainable);
  mlp = Mlp(ps, prefix + ".mlp", dim, hidden, rng, trainable);
}

Var EncoderBlock::forward(Tape& t, Var x) const {
  Var n = ln1.forward(t, x);
  x = t.add(x, attn.forward(t, n, n));
  return t.add(x, mlp.forward(t, ln2.forward(t, x)));
}

CrossBlock::CrossBlock(ParamStore& ps, const std::string& prefix, int dim,
                       int heads, int hidden, std::mt19937_64& rng,
                       bool trainable, int kv_dim) {
  ln_q = LayerNorm(ps, prefix + ".ln_q", dim, trainable);
  attn = MultiheadAttention(ps, prefix + ".attn", dim, heads, rng, trainable,
                            kv_dim);
  ln2 = LayerNorm(ps, prefix + ".ln2", dim, trainable);
  mlp = Mlp(ps, prefix + ".mlp", dim, hidden, rng, trainable);
}

Var CrossBlock::forward(Tape& t, Var x, Var memory) const {
  x = t.add(x, attn.forward(t, ln_q.forward(t, x), memory));
  return t.add(x, mlp.forward(t, ln2.forward(t, x)));
}

}  // namespace acumen
