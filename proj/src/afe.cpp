// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/afe.hpp"

namespace acumen {

void AFEConfig::validate() const {
  for (double w : branch_weights)
    ACUMEN_CHECK(w > 0.0, "AFE branch weights must be positive, got " << w);
  ACUMEN_CHECK(se_reduction >= 1, "AFE SE reduction must be >= 1");
}

AFE::AFE(ParamStore& ps, const BackboneConfig& backbone, const AFEConfig& cfg,
         std::mt19937_64& rng)
    : cfg_(cfg), channels_(backbone.channels) {
  cfg_.validate();
  const int C = channels_;
  const int squeeze_dim = C + kAttributeCount;
  const int bottleneck = std::max(1, squeeze_dim / cfg_.se_reduction);
  for (int i = 0; i < 3; ++i) {
    const std::string prefix = "afe.gate" + std::to_string(i);
    gates_[static_cast<std::size_t>(i)] = GateParams{
        Linear(ps, prefix + ".lin", C, C, rng),
        Linear(ps, prefix + ".se1", squeeze_dim, bottleneck, rng),
        Linear(ps, prefix + ".se2", bottleneck, C, rng)};
  }
  fix_lin_ = Linear(ps, "afe.fix_lin", 1, 1, rng);
  out_ln_ = LayerNorm(ps, "afe.out_ln", C);
}

Var AFE::attribute_gate(Tape& t, Var branch, const AttributeScores& attrs,
                        int branch_idx) const {
  ACUMEN_CHECK(branch_idx >= 0 && branch_idx < 3, "branch index out of range");
  ACUMEN_CHECK(t.val(branch).cols() == channels_,
               "attribute_gate: branch has " << t.val(branch).cols()
                                             << " channels, expected "
                                             << channels_);
  ACUMEN_CHECK(t.val(attrs.raw).rows() == 1 &&
                   t.val(attrs.raw).cols() == kAttributeCount,
               "attribute_gate: attrs.raw must be 1x" << kAttributeCount);
  const GateParams& g = gates_[static_cast<std::size_t>(branch_idx)];

  Var x = g.lin.forward(t, branch);
  Var scales;
  if (excitation_override) {
    ACUMEN_CHECK(excitation_override->rows() == 1 &&
                     excitation_override->cols() == channels_,
                 "excitation override must be 1x" << channels_);
    scales = t.leaf(*excitation_override);
  } else {
    Var squeeze = t.concat_cols({t.col_mean(x), attrs.raw});
    scales = t.sigmoid(g.se2.forward(t, t.relu(g.se1.forward(t, squeeze))));
  }
  return t.add(t.scale_cols(x, scales), branch);
}

Var AFE::fixation_attend(Tape& t, Var branch, const FixationMap& fix,
                         bool cls_present) const {
  const long grid_tokens = t.val(fix.prob).rows();
  const long expect = grid_tokens + (cls_present ? 1 : 0);
  ACUMEN_CHECK(t.val(branch).rows() == expect,
               "fixation_attend: branch has " << t.val(branch).rows()
                                              << " tokens, fixation grid has "
                                              << grid_tokens
                                              << (cls_present ? " plus cls"
                                                              : ""));
  Var logits = fix_lin_.forward(t, fix.prob);
  Var weights =
      t.softmax_all_scaled(logits, static_cast<double>(grid_tokens));
  if (cls_present)
    weights = t.concat_rows({t.leaf(Mat::Ones(1, 1)), weights});
  return t.scale_rows(branch, weights);
}

Var AFE::combine(Tape& t, const std::array<Var, 3>& branches) const {
  const auto& w = cfg_.branch_weights;
  Var sum = t.add(t.add(t.scalar_mul(branches[0], w[0]),
                        t.scalar_mul(branches[1], w[1])),
                  t.scalar_mul(branches[2], w[2]));
  return t.scalar_mul(sum, 1.0 / cfg_.m_norm());
}

FusedFeature AFE::fuse(Tape& t, const MultiLevelFeatures& feats,
                       const AttributeScores& attrs,
                       const FixationMap& fix) const {
  std::array<Var, 3> processed;
  for (int i = 0; i < 3; ++i) {
    Var gated = attribute_gate(t, feats.levels[static_cast<std::size_t>(i)],
                               attrs, i);
    processed[static_cast<std::size_t>(i)] =
        fixation_attend(t, gated, fix, feats.cls_present);
  }
  FusedFeature out;
  out.tokens = out_ln_.forward(t, combine(t, processed));
  out.grid_rows = feats.grid_rows;
  out.grid_cols = feats.grid_cols;
  out.cls_present = feats.cls_present;
  return out;
}

}  // namespace acumen
