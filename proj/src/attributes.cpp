// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/attributes.hpp"

namespace acumen {

Eigen::VectorXd attribute_proportions(const Mat& raw) {
  ACUMEN_CHECK(raw.size() == kAttributeCount,
               "attribute vector must have " << kAttributeCount
                                             << " entries, got " << raw.size());
  Eigen::VectorXd p(kAttributeCount);
  for (int i = 0; i < kAttributeCount; ++i)
    p(i) = std::max(0.0, raw.data()[i]);
  const double s = p.sum();
  if (s <= 0.0)
    return Eigen::VectorXd::Constant(kAttributeCount, 1.0 / kAttributeCount);
  return p / s;
}

AttributeHead::AttributeHead(ParamStore& ps, const BackboneConfig& backbone,
                             const AttributeConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg), channels_(backbone.channels) {
  ACUMEN_CHECK(cfg_.dropout >= 0.0 && cfg_.dropout < 1.0,
               "attribute dropout must be in [0,1)");
  const int C = channels_;
  const int hidden = cfg_.hidden > 0 ? cfg_.hidden : C;
  for (int i = 0; i < 3; ++i)
    ln_[i] = LayerNorm(ps, "attributes.ln" + std::to_string(i), C);
  fc1_ = Linear(ps, "attributes.fc1", 3 * C, hidden, rng);
  bn_ = BatchNorm1d(ps, "attributes.bn", hidden);
  fc2_ = Linear(ps, "attributes.fc2", hidden, kAttributeCount, rng);
}

Var AttributeHead::pre_norm(Tape& t, const MultiLevelFeatures& feats) const {
  ACUMEN_CHECK(t.val(feats.levels[0]).cols() == channels_,
               "attribute head channel mismatch: expected "
                   << channels_ << ", got "
                   << t.val(feats.levels[0]).cols());
  Var cat = t.concat_cols({ln_[0].forward(t, feats.levels[0]),
                           ln_[1].forward(t, feats.levels[1]),
                           ln_[2].forward(t, feats.levels[2])});
  return fc1_.forward(t, t.col_mean(cat));
}

Var AttributeHead::batch_norm(Tape& t, Var stacked_rows, bool training) const {
  return bn_.forward(t, stacked_rows, training);
}

AttributeScores AttributeHead::post_norm(Tape& t, Var row,
                                         std::mt19937_64& rng,
                                         bool training) const {
  Var h = t.relu(row);
  h = t.dropout(h, cfg_.dropout, rng, training);
  return AttributeScores{fc2_.forward(t, h)};
}

AttributeScores AttributeHead::predict(Tape& t,
                                       const MultiLevelFeatures& feats,
                                       std::mt19937_64& rng,
                                       bool training) const {
  Var pooled = pre_norm(t, feats);
  Var normed = batch_norm(t, pooled, training);
  return post_norm(t, normed, rng, training);
}

Var attribute_loss(Tape& t, const AttributeScores& pred,
                   const Eigen::VectorXd& attr_gt) {
  ACUMEN_CHECK(attr_gt.size() == kAttributeCount,
               "attribute_loss: ground truth has " << attr_gt.size()
                                                   << " entries, need "
                                                   << kAttributeCount);
  ACUMEN_CHECK(t.val(pred.raw).rows() == 1 &&
                   t.val(pred.raw).cols() == kAttributeCount,
               "attribute_loss: prediction must be 1x" << kAttributeCount);
  Var diff = t.sub(pred.raw, t.leaf(attr_gt.transpose()));
  return t.mean_all(t.hadamard(diff, diff));
}

}  // namespace acumen
