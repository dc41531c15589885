// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "acumen/afe.hpp"
#include "acumen/nn.hpp"

namespace acumen {

struct ObjectiveConfig {
  int shared_dim = 32;  // D_s, the joint latent width
  int hidden = 0;       // projector hidden width; 0 = input width
};

struct LossWeights {
  double alpha = 1.0;  // fixation term
  double beta = 1.0;   // attribute term
  double gamma = 1.0;  // consistency term
  void validate() const;
};

struct LossBreakdown {
  double mask = 0.0;
  double fix = 0.0;
  double attr = 0.0;
  double consist = 0.0;
  double total = 0.0;
};

/// Two-layer projection heads mapping the fused visual tokens and the text
/// embedding into the shared latent space. Outputs are L2-normalized; an
/// exactly zero vector falls back to the first basis vector.
class Projectors {
 public:
  Projectors(ParamStore& ps, const BackboneConfig& backbone,
             const ObjectiveConfig& cfg, std::mt19937_64& rng);

  Var project_visual(Tape& t, const FusedFeature& fused) const;
  Var project_text(Tape& t, Var text_embedding) const;

  const ObjectiveConfig& config() const { return cfg_; }

 private:
  ObjectiveConfig cfg_;
  int channels_ = 0;
  int text_dim_ = 0;
  Linear v1_, v2_;
  Linear t1_, t2_;
};

/// Unit-normalizes a 1 x D row on the tape; a row of exact zeros becomes the
/// constant e_1 (degenerate-input convention).
Var l2_normalize_row(Tape& t, Var row);

/// 1 - <v, t> for unit-norm rows; range [0, 2].
Var consistency_loss(Tape& t, Var v, Var u);

/// Combines the four loss parts with the balancing weights. The returned
/// breakdown satisfies total = mask + alpha*fix + beta*attr + gamma*consist
/// by construction. NaN parts are rejected naming the offending term.
LossBreakdown total_loss(double mask, double fix, double attr, double consist,
                         const LossWeights& w);

/// Tape-side combination for backward. consist may be invalid (no text
/// branch in the graph); it is then excluded entirely.
Var total_loss_node(Tape& t, Var mask, Var fix, Var attr, Var consist,
                    const LossWeights& w);

}  // namespace acumen
