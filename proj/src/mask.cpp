// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/mask.hpp"

#include <cmath>

#include "acumen/image.hpp"

namespace acumen {

MaskDecoder::MaskDecoder(ParamStore& ps, const BackboneConfig& backbone,
                         const MaskDecoderConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg), channels_(backbone.channels) {
  ACUMEN_CHECK(cfg_.blocks >= 1, "mask decoder needs at least one block");
  const int C = channels_;
  const int hidden = cfg_.hidden > 0 ? cfg_.hidden : 4 * C;
  blocks_.reserve(static_cast<std::size_t>(cfg_.blocks));
  for (int i = 0; i < cfg_.blocks; ++i)
    blocks_.emplace_back(ps, "mask.blocks." + std::to_string(i), C,
                         cfg_.heads, hidden, rng);
  cbr_w_ = &ps.create("mask.cbr.weight", xavier_uniform(9 * C, C, rng));
  cbr_b_ = &ps.create("mask.cbr.bias", Mat::Zero(1, C));
  cbr_bn_ = BatchNorm1d(ps, "mask.cbr.bn", C);
  out_w_ = &ps.create("mask.out.weight", xavier_uniform(9 * C, 1, rng));
  out_b_ = &ps.create("mask.out.bias", Mat::Zero(1, 1));
}

Var MaskDecoder::decode_tokens(Tape& t, const FusedFeature& fused) const {
  ACUMEN_CHECK(t.val(fused.tokens).cols() == channels_,
               "mask decoder channel mismatch: expected "
                   << channels_ << ", got " << t.val(fused.tokens).cols());
  Var x = fused.tokens;
  for (const EncoderBlock& block : blocks_) x = block.forward(t, x);
  if (fused.cls_present)
    x = t.slice_rows(x, 1, static_cast<int>(t.val(x).rows()) - 1);
  ACUMEN_CHECK(t.val(x).rows() ==
                   static_cast<long>(fused.grid_rows) * fused.grid_cols,
               "mask decoder grid/token mismatch");
  return t.conv2d(x, t.param(*cbr_w_), t.param(*cbr_b_), fused.grid_rows,
                  fused.grid_cols, 3);
}

Var MaskDecoder::batch_norm(Tape& t, Var stacked_pixel_rows,
                            bool training) const {
  return cbr_bn_.forward(t, stacked_pixel_rows, training);
}

MaskLogits MaskDecoder::finish(Tape& t, Var pixel_rows, int grid_rows,
                               int grid_cols, int image_size) const {
  ACUMEN_CHECK(t.val(pixel_rows).rows() ==
                   static_cast<long>(grid_rows) * grid_cols,
               "mask decoder finish: pixel row count mismatch");
  Var x = t.relu(pixel_rows);
  const int up_r = 4 * grid_rows;
  const int up_c = 4 * grid_cols;
  x = t.resize_bilinear(x, grid_rows, grid_cols, up_r, up_c);
  x = t.conv2d(x, t.param(*out_w_), t.param(*out_b_), up_r, up_c, 3);
  MaskLogits out;
  out.rows = image_size;
  out.cols = image_size;
  out.logits = t.resize_bilinear(x, up_r, up_c, image_size, image_size);
  out.prob = t.sigmoid(out.logits);
  return out;
}

MaskLogits MaskDecoder::predict(Tape& t, const FusedFeature& fused,
                                int image_size, bool training) const {
  Var pre = decode_tokens(t, fused);
  Var normed = batch_norm(t, pre, training);
  return finish(t, normed, fused.grid_rows, fused.grid_cols, image_size);
}

int mask_weight_kernel(int image_size) {
  int k = static_cast<int>(std::lround(31.0 * image_size / 336.0));
  if (k % 2 == 0) ++k;
  return std::max(3, k);
}

Mat mask_boundary_weights(const Mat& gt_mask) {
  ACUMEN_CHECK(gt_mask.rows() == gt_mask.cols(),
               "boundary weights expect a square mask");
  const int k = mask_weight_kernel(static_cast<int>(gt_mask.rows()));
  return 1.0 + 5.0 * (box_mean(gt_mask, k) - gt_mask).array().abs();
}

MaskLossParts mask_loss(Tape& t, const MaskLogits& pred, const Mat& gt_mask) {
  ACUMEN_CHECK(gt_mask.rows() == pred.rows && gt_mask.cols() == pred.cols,
               "mask_loss: gt " << gt_mask.rows() << "x" << gt_mask.cols()
                                << " vs prediction " << pred.rows << "x"
                                << pred.cols);
  ACUMEN_CHECK(((gt_mask.array() == 0.0) || (gt_mask.array() == 1.0)).all(),
               "mask_loss: gt must be binary");

  const Mat w_grid = mask_boundary_weights(gt_mask);
  Var w = t.leaf(grid_to_column(w_grid));
  Var g = t.leaf(grid_to_column(gt_mask));
  Var z = pred.logits;
  Var p = pred.prob;

  // Stable BCE on logits: max(z,0) - z*g + log(1 + exp(-|z|)).
  Var abs_z = t.add(t.relu(z), t.relu(t.scalar_mul(z, -1.0)));
  Var softplus = t.log_(t.scalar_add(t.exp_(t.scalar_mul(abs_z, -1.0)), 1.0));
  Var bce = t.add(t.sub(t.relu(z), t.hadamard(z, g)), softplus);

  const double w_sum = w_grid.sum();
  MaskLossParts parts;
  parts.weighted_bce =
      t.scalar_mul(t.sum_all(t.hadamard(w, bce)), 1.0 / w_sum);

  Var inter = t.sum_all(t.hadamard(w, t.hadamard(p, g)));
  Var uni = t.sum_all(t.hadamard(
      w, t.sub(t.add(p, g), t.hadamard(p, g))));
  Var ratio = t.div_1x1(t.scalar_add(inter, 1.0), t.scalar_add(uni, 1.0));
  parts.weighted_iou = t.scalar_add(t.scalar_mul(ratio, -1.0), 1.0);

  parts.total = t.add(parts.weighted_bce, parts.weighted_iou);
  return parts;
}

}  // namespace acumen
