// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/fixation.hpp"

#include "acumen/image.hpp"

namespace acumen {

namespace {
constexpr double kLogEps = 1e-8;

Var drop_cls(Tape& t, Var level, bool cls_present) {
  if (!cls_present) return level;
  return t.slice_rows(level, 1, static_cast<int>(t.val(level).rows()) - 1);
}
}  // namespace

FixationDecoder::FixationDecoder(ParamStore& ps,
                                 const BackboneConfig& backbone,
                                 const FixationConfig& cfg,
                                 std::mt19937_64& rng)
    : cfg_(cfg), channels_(backbone.channels) {
  ACUMEN_CHECK(cfg_.blocks >= 1, "fixation decoder needs at least one block");
  ACUMEN_CHECK(cfg_.conv_ksize >= 1 && cfg_.conv_ksize % 2 == 1,
               "fixation conv kernel must be odd");
  const int C = channels_;
  const int hidden = cfg_.hidden > 0 ? cfg_.hidden : 4 * C;
  const int grid_tokens = backbone.grid_side() * backbone.grid_side();

  for (int i = 0; i < 3; ++i)
    ln_[i] = LayerNorm(ps, "fixation.ln" + std::to_string(i), C);
  catt_ = MultiheadAttention(ps, "fixation.catt", C, cfg_.heads, rng,
                             /*trainable=*/true, /*kv_dim=*/3 * C);
  pos_ = &ps.create("fixation.pos", normal_init(grid_tokens, C, 0.02, rng));
  blocks_.reserve(static_cast<std::size_t>(cfg_.blocks));
  for (int i = 0; i < cfg_.blocks; ++i)
    blocks_.emplace_back(ps, "fixation.blocks." + std::to_string(i), C,
                         cfg_.heads, hidden, rng, /*trainable=*/true,
                         /*kv_dim=*/3 * C);
  to_scalar_ = Linear(ps, "fixation.to_scalar", C, 1, rng);
  conv_w_ = &ps.create(
      "fixation.conv.weight",
      xavier_uniform(cfg_.conv_ksize * cfg_.conv_ksize, 1, rng));
  conv_b_ = &ps.create("fixation.conv.bias", Mat::Zero(1, 1));
}

FixationMap FixationDecoder::predict(Tape& t,
                                     const MultiLevelFeatures& feats) const {
  ACUMEN_CHECK(t.val(feats.levels[0]).cols() == channels_,
               "fixation decoder channel mismatch: expected "
                   << channels_ << ", got "
                   << t.val(feats.levels[0]).cols());
  const int rows = feats.grid_rows;
  const int cols = feats.grid_cols;
  const long grid_tokens = t.val(feats.levels[2]).rows() -
                           (feats.cls_present ? 1 : 0);
  ACUMEN_CHECK(static_cast<long>(rows) * cols == grid_tokens,
               "fixation decoder grid/token mismatch: grid "
                   << rows << "x" << cols << " vs " << grid_tokens
                   << " tokens");
  ACUMEN_CHECK(pos_->value.rows() == grid_tokens,
               "fixation positional table covers " << pos_->value.rows()
                                                   << " tokens, need "
                                                   << grid_tokens);

  Var lv0 = drop_cls(t, feats.levels[0], feats.cls_present);
  Var lv1 = drop_cls(t, feats.levels[1], feats.cls_present);
  Var lv2 = drop_cls(t, feats.levels[2], feats.cls_present);

  Var n0 = ln_[0].forward(t, lv0);
  Var n1 = ln_[1].forward(t, lv1);
  Var n2 = ln_[2].forward(t, lv2);
  Var memory = t.concat_cols({n0, n1, n2});

  Var x = t.add(t.add(catt_.forward(t, lv2, memory), n2), t.param(*pos_));
  for (const CrossBlock& block : blocks_) x = block.forward(t, x, memory);

  FixationMap map;
  map.rows = rows;
  map.cols = cols;
  Var scalar = to_scalar_.forward(t, x);
  map.logits = t.conv2d(scalar, t.param(*conv_w_), t.param(*conv_b_), rows,
                        cols, cfg_.conv_ksize);
  map.prob = t.softmax_all(map.logits);
  return map;
}

FixationLossParts fixation_loss(Tape& t, const FixationMap& pred,
                                const Mat& gt_grid) {
  ACUMEN_CHECK(gt_grid.rows() == pred.rows && gt_grid.cols() == pred.cols,
               "fixation_loss: gt grid " << gt_grid.rows() << "x"
                                         << gt_grid.cols() << " vs prediction "
                                         << pred.rows << "x" << pred.cols);
  const double gt_sum = gt_grid.sum();
  ACUMEN_CHECK(std::abs(gt_sum - 1.0) < 1e-6,
               "fixation_loss: gt must sum to 1, sums to " << gt_sum);

  const long n = gt_grid.size();
  const Mat gt_col = grid_to_column(gt_grid);
  Var gt = t.leaf(gt_col);
  Var p = pred.prob;

  // KL(gt || p) with smoothed logarithms.
  Var log_ratio = t.sub(t.log_(t.scalar_add(gt, kLogEps)),
                        t.log_(t.scalar_add(p, kLogEps)));
  FixationLossParts parts;
  parts.kl = t.sum_all(t.hadamard(gt, log_ratio));

  const double gt_mean = gt_col.sum() / static_cast<double>(n);
  const Mat gt_centered = gt_col.array() - gt_mean;
  const double gt_ss = gt_centered.squaredNorm();

  if (gt_ss == 0.0) {
    // Constant ground truth: correlation against it is defined as perfect,
    // contributing nothing (and no gradient) to the loss.
    parts.one_minus_cc = t.leaf(Mat::Zero(1, 1));
  } else {
    Var pc = t.add_1x1(p, t.mean_all(p), -1.0);
    Var cov = t.sum_all(t.hadamard(pc, t.leaf(gt_centered)));
    Var denom =
        t.sqrt_(t.scalar_add(t.scalar_mul(t.sum_all(t.hadamard(pc, pc)),
                                          gt_ss),
                             1e-24));
    Var cc = t.div_1x1(cov, denom);
    parts.one_minus_cc = t.scalar_add(t.scalar_mul(cc, -1.0), 1.0);
  }
  parts.total = t.add(parts.kl, parts.one_minus_cc);
  return parts;
}

Mat grid_to_column(const Mat& grid) {
  Mat col(grid.size(), 1);
  long i = 0;
  for (long r = 0; r < grid.rows(); ++r)
    for (long c = 0; c < grid.cols(); ++c) col(i++, 0) = grid(r, c);
  return col;
}

Mat column_to_grid(const Mat& column, int rows, int cols) {
  ACUMEN_CHECK(column.cols() == 1 &&
                   column.rows() == static_cast<long>(rows) * cols,
               "column_to_grid: need " << rows * cols << "x1, got "
                                       << column.rows() << "x"
                                       << column.cols());
  Mat grid(rows, cols);
  long i = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) grid(r, c) = column(i++, 0);
  return grid;
}

Mat downsample_fixation(const Mat& fixation, int rows, int cols) {
  Mat small = resize_gray(fixation, rows, cols, Interp::kArea);
  small = small.cwiseMax(0.0);
  const double s = small.sum();
  if (s <= 0.0)
    return Mat::Constant(rows, cols, 1.0 / static_cast<double>(rows * cols));
  return small / s;
}

}  // namespace acumen
