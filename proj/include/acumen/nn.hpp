// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>

#include "acumen/autograd.hpp"

namespace acumen {

// Weight initializers. All randomness flows through caller-owned engines so
// module construction order alone fixes the parameter values.
Mat xavier_uniform(int rows, int cols, std::mt19937_64& rng);
Mat normal_init(int rows, int cols, double stddev, std::mt19937_64& rng);

// Fixed sinusoidal positional table, tokens x dim.
Mat sinusoidal_positions(int tokens, int dim);

/// y = x W + b with W stored input-major (in x out).
struct Linear {
  Param* W = nullptr;
  Param* b = nullptr;

  Linear() = default;
  Linear(ParamStore& ps, const std::string& prefix, int in, int out,
         std::mt19937_64& rng, bool trainable = true);
  Var forward(Tape& t, Var x) const;
};

struct LayerNorm {
  Param* gamma = nullptr;
  Param* beta = nullptr;

  LayerNorm() = default;
  LayerNorm(ParamStore& ps, const std::string& prefix, int dim,
            bool trainable = true);
  Var forward(Tape& t, Var x) const;
};

/// Batch normalization over rows (each row one sample or one pixel).
struct BatchNorm1d {
  Param* gamma = nullptr;
  Param* beta = nullptr;
  Param* running_mean = nullptr;
  Param* running_var = nullptr;

  BatchNorm1d() = default;
  BatchNorm1d(ParamStore& ps, const std::string& prefix, int dim,
              bool trainable = true);
  Var forward(Tape& t, Var x, bool training) const;
};

/// Standard multi-head attention. Memory may have its own width kv_dim
/// (defaults to dim); keys and values project kv_dim -> dim.
struct MultiheadAttention {
  Linear q, k, v, o;
  int heads = 1;
  int dim = 0;

  MultiheadAttention() = default;
  MultiheadAttention(ParamStore& ps, const std::string& prefix, int dim,
                     int heads, std::mt19937_64& rng, bool trainable = true,
                     int kv_dim = -1);
  Var forward(Tape& t, Var query, Var memory) const;
};

/// Two-layer GELU feed-forward.
struct Mlp {
  Linear fc1, fc2;

  Mlp() = default;
  Mlp(ParamStore& ps, const std::string& prefix, int dim, int hidden,
      std::mt19937_64& rng, bool trainable = true);
  Var forward(Tape& t, Var x) const;
};

/// Pre-norm transformer encoder block (self-attention + feed-forward).
struct EncoderBlock {
  LayerNorm ln1, ln2;
  MultiheadAttention attn;
  Mlp mlp;

  EncoderBlock() = default;
  EncoderBlock(ParamStore& ps, const std::string& prefix, int dim, int heads,
               int hidden, std::mt19937_64& rng, bool trainable = true);
  Var forward(Tape& t, Var x) const;
};

/// Pre-norm block attending from the running stream to external memory.
/// Callers supply memory already normalized where the architecture wants it.
struct CrossBlock {
  LayerNorm ln_q, ln2;
  MultiheadAttention attn;
  Mlp mlp;

  CrossBlock() = default;
  CrossBlock(ParamStore& ps, const std::string& prefix, int dim, int heads,
             int hidden, std::mt19937_64& rng, bool trainable = true,
             int kv_dim = -1);
  Var forward(Tape& t, Var x, Var memory) const;
};

}  // namespace acumen
