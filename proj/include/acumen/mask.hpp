// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "acumen/afe.hpp"
#include "acumen/nn.hpp"

namespace acumen {

struct MaskDecoderConfig {
  int blocks = 1;  // self-attention decoder iterations (M_dec)
  int heads = 4;
  int hidden = 0;  // feed-forward width; 0 = 4x channel dim
};

/// Mask prediction at image resolution: logits and prob = sigmoid(logits)
/// are (size*size) x 1 columns in row-major order.
struct MaskLogits {
  Var logits;
  Var prob;
  int rows = 0;
  int cols = 0;
};

/// Token decoder -> grid -> conv+BN+ReLU -> x4 bilinear upsample -> 1-channel
/// conv -> bilinear resize to the training image resolution.
///
/// The conv BatchNorm normalizes per channel over all pixels it sees, so the
/// forward is split like the attribute head's: decode_tokens() produces each
/// sample's pre-norm pixel rows, callers stack them, apply batch_norm(), and
/// finish() each slice. predict() wraps the phases for a batch of one.
class MaskDecoder {
 public:
  MaskDecoder(ParamStore& ps, const BackboneConfig& backbone,
              const MaskDecoderConfig& cfg, std::mt19937_64& rng);

  Var decode_tokens(Tape& t, const FusedFeature& fused) const;
  Var batch_norm(Tape& t, Var stacked_pixel_rows, bool training) const;
  MaskLogits finish(Tape& t, Var pixel_rows, int grid_rows, int grid_cols,
                    int image_size) const;

  MaskLogits predict(Tape& t, const FusedFeature& fused, int image_size,
                     bool training) const;

  const MaskDecoderConfig& config() const { return cfg_; }

 private:
  MaskDecoderConfig cfg_;
  int channels_ = 0;
  std::vector<EncoderBlock> blocks_;
  Param* cbr_w_ = nullptr;  // 3x3 conv, C -> C
  Param* cbr_b_ = nullptr;
  BatchNorm1d cbr_bn_;
  Param* out_w_ = nullptr;  // 3x3 conv, C -> 1, after upsampling
  Param* out_b_ = nullptr;
};

/// Boundary-emphasis weight map: 1 + 5 * |box_mean(gt, k) - gt| with
/// k = max(3, round(31 * size / 336)) forced odd.
Mat mask_boundary_weights(const Mat& gt_mask);
int mask_weight_kernel(int image_size);

struct MaskLossParts {
  Var weighted_bce;
  Var weighted_iou;
  Var total;
};

/// Weighted BCE (numerically stable on logits) plus weighted IoU, both
/// normalized by the boundary weights.
MaskLossParts mask_loss(Tape& t, const MaskLogits& pred, const Mat& gt_mask);

}  // namespace acumen
