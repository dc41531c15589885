// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "acumen/attributes.hpp"
#include "acumen/backbone.hpp"
#include "acumen/fixation.hpp"
#include "acumen/nn.hpp"

namespace acumen {

struct AFEConfig {
  std::array<double, 3> branch_weights{1.0, 2.0, 4.0};
  int se_reduction = 4;

  double m_norm() const {
    return branch_weights[0] + branch_weights[1] + branch_weights[2];
  }
  void validate() const;
};

/// Output of the attribute-fixation fusion: layer-normalized tokens with the
/// same layout as the input levels.
struct FusedFeature {
  Var tokens;
  int grid_rows = 0;
  int grid_cols = 0;
  bool cls_present = false;
};

/// Per-branch attribute gating (squeeze-and-excitation conditioned on the
/// attribute scores), fixation-weighted token attention, then a fixed-weight
/// combination of the three branches followed by layer normalization.
class AFE {
 public:
  AFE(ParamStore& ps, const BackboneConfig& backbone, const AFEConfig& cfg,
      std::mt19937_64& rng);

  /// x = Linear(branch); channel scales from a two-layer SE bottleneck fed
  /// with [mean-pooled x, attrs.raw]; returns x .* scales + branch.
  /// Forcing the excitation to zero reduces this to the identity exactly.
  Var attribute_gate(Tape& t, Var branch, const AttributeScores& attrs,
                     int branch_idx) const;

  /// Per-token weights: softmax over tokens of Linear(fixation value),
  /// rescaled by the token count so a uniform fixation map scales every
  /// token by exactly 1. A leading cls token gets the neutral weight 1.
  Var fixation_attend(Tape& t, Var branch, const FixationMap& fix,
                      bool cls_present) const;

  /// Weighted mean of the three processed branches (pre-normalization):
  /// sum(W_i * branch_i) / sum(W).
  Var combine(Tape& t, const std::array<Var, 3>& branches) const;

  FusedFeature fuse(Tape& t, const MultiLevelFeatures& feats,
                    const AttributeScores& attrs,
                    const FixationMap& fix) const;

  const AFEConfig& config() const { return cfg_; }

  /// Test seam: when non-null, replaces the SE excitation output (the
  /// channel scales before the residual) with this 1 x C row.
  const Mat* excitation_override = nullptr;

 private:
  AFEConfig cfg_;
  int channels_ = 0;
  struct GateParams {
    Linear lin, se1, se2;
  };
  std::array<GateParams, 3> gates_;
  Linear fix_lin_;  // scalar map on the fixation value, shared by branches
  LayerNorm out_ln_;
};

}  // namespace acumen
