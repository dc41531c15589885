// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "acumen/backbone.hpp"
#include "acumen/nn.hpp"

namespace acumen {

/// Spatial attention prediction over the patch grid. logits and prob are
/// (rows*cols) x 1 column nodes in row-major grid order; prob is the spatial
/// softmax of logits and sums to 1.
struct FixationMap {
  Var logits;
  Var prob;
  int rows = 0;
  int cols = 0;
};

struct FixationConfig {
  int blocks = 3;     // N cascaded decoder blocks
  int heads = 4;
  int hidden = 0;     // feed-forward width; 0 = 4x channel dim
  int conv_ksize = 3; // final smoothing conv over the grid
};

/// Decodes the three tapped levels into a fixation map: cross-attend the
/// deepest level to the channelwise concatenation of the normalized levels,
/// add the normalized deepest level and a learned positional embedding, run
/// the decoder blocks, then project tokens to one channel and smooth with a
/// small 2-D convolution over the grid.
class FixationDecoder {
 public:
  FixationDecoder(ParamStore& ps, const BackboneConfig& backbone,
                  const FixationConfig& cfg, std::mt19937_64& rng);

  FixationMap predict(Tape& t, const MultiLevelFeatures& feats) const;

  const FixationConfig& config() const { return cfg_; }

 private:
  FixationConfig cfg_;
  int channels_ = 0;
  LayerNorm ln_[3];
  MultiheadAttention catt_;
  Param* pos_ = nullptr;  // learned P_s over the grid tokens
  std::vector<CrossBlock> blocks_;
  Linear to_scalar_;
  Param* conv_w_ = nullptr;
  Param* conv_b_ = nullptr;
};

struct FixationLossParts {
  Var kl;            // KL(gt || pred)
  Var one_minus_cc;  // 1 - Pearson correlation
  Var total;
};

/// gt_grid must already be resized to the map's grid and sum to 1.
/// Logarithms are smoothed with eps = 1e-8. When gt is exactly constant the
/// correlation term is defined as a perfect match (contribution 0).
FixationLossParts fixation_loss(Tape& t, const FixationMap& pred,
                                const Mat& gt_grid);

// Row-major grid <-> column flattening shared by the spatial modules.
Mat grid_to_column(const Mat& grid);
Mat column_to_grid(const Mat& column, int rows, int cols);

/// Area-downsamples a full-resolution fixation raster to the patch grid and
/// renormalizes it to sum 1.
Mat downsample_fixation(const Mat& fixation, int rows, int cols);

}  // namespace acumen
