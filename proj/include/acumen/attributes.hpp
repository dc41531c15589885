// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "acumen/backbone.hpp"
#include "acumen/nn.hpp"
#include "acumen/taxonomy.hpp"

namespace acumen {

struct AttributeConfig {
  int hidden = 0;        // bottleneck width; 0 = channel dim
  double dropout = 0.1;  // active only in training mode
};

/// Attribute-contribution scores. raw is the head output (1 x 17) and the
/// loss target space; the proportions view clamps at zero and renormalizes
/// for reporting.
struct AttributeScores {
  Var raw;
};

Eigen::VectorXd attribute_proportions(const Mat& raw);

/// Normalize-concat-pool head: LN each level, concatenate channelwise, mean
/// over tokens, then Linear -> BatchNorm -> ReLU -> Dropout -> Linear to 17.
///
/// BatchNorm statistics must see the whole minibatch, so the forward is
/// split: pre_norm() maps one sample to its 1 x hidden pooled row, callers
/// stack those rows and apply batch_norm(), then post_norm() finishes each
/// row. predict() wraps the three phases for a batch of one.
class AttributeHead {
 public:
  AttributeHead(ParamStore& ps, const BackboneConfig& backbone,
                const AttributeConfig& cfg, std::mt19937_64& rng);

  Var pre_norm(Tape& t, const MultiLevelFeatures& feats) const;
  Var batch_norm(Tape& t, Var stacked_rows, bool training) const;
  AttributeScores post_norm(Tape& t, Var row, std::mt19937_64& rng,
                            bool training) const;

  AttributeScores predict(Tape& t, const MultiLevelFeatures& feats,
                          std::mt19937_64& rng, bool training) const;

  const AttributeConfig& config() const { return cfg_; }

 private:
  AttributeConfig cfg_;
  int channels_ = 0;
  LayerNorm ln_[3];
  Linear fc1_;
  BatchNorm1d bn_;
  Linear fc2_;
};

/// Mean squared error over the 17 raw scores.
Var attribute_loss(Tape& t, const AttributeScores& pred,
                   const Eigen::VectorXd& attr_gt);

}  // namespace acumen
