// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/model.hpp"

namespace acumen {

AcumenModel::AcumenModel(ParamStore& ps, const TrainConfig& cfg,
                         std::mt19937_64& rng, bool with_text)
    : cfg_(cfg),
      backbone_(ps, cfg.backbone, rng),
      text_(with_text
                ? std::make_unique<TextEncoder>(ps, cfg.backbone, rng)
                : nullptr),
      fixation_(ps, cfg.backbone, cfg.fixation, rng),
      attributes_(ps, cfg.backbone, cfg.attribute, rng),
      afe_(ps, cfg.backbone, cfg.afe, rng),
      mask_(ps, cfg.backbone, cfg.mask, rng),
      projectors_(ps, cfg.backbone, cfg.objective, rng) {
  cfg_.validate();
}

bool AcumenModel::is_text_param(const std::string& name) {
  return name.rfind("text.", 0) == 0 || name.rfind("proj.text.", 0) == 0;
}

BatchGraph AcumenModel::forward_batch(
    Tape& t, const std::vector<const CamouflageSample*>& batch,
    std::mt19937_64& dropout_rng, bool training) const {
  ACUMEN_CHECK(!batch.empty(), "forward_batch: empty batch");
  const int size = cfg_.image_size();
  const bool use_text = cfg_.weights.gamma > 0.0;
  ACUMEN_CHECK(!use_text || text_ != nullptr,
               "consistency weight is nonzero but the model was built "
               "without a text encoder");

  const int B = static_cast<int>(batch.size());
  BatchGraph g;
  g.samples.resize(static_cast<std::size_t>(B));

  // Phase one: per-sample trunk up to the attribute head's pooled row. The
  // batch-norm layers need every sample's rows stacked before anyone can
  // proceed, so the encoded features are kept for the fusion phase.
  std::vector<MultiLevelFeatures> feats(static_cast<std::size_t>(B));
  std::vector<Var> attr_rows(static_cast<std::size_t>(B));
  for (int i = 0; i < B; ++i) {
    const CamouflageSample& s = *batch[static_cast<std::size_t>(i)];
    ACUMEN_CHECK(s.image.h == size && s.image.w == size,
                 "forward_batch: sample raster is " << s.image.h << "x"
                                                    << s.image.w
                                                    << ", model expects "
                                                    << size);
    feats[static_cast<std::size_t>(i)] = backbone_.encode(t, s.image);
    g.samples[static_cast<std::size_t>(i)].fix =
        fixation_.predict(t, feats[static_cast<std::size_t>(i)]);
    attr_rows[static_cast<std::size_t>(i)] =
        attributes_.pre_norm(t, feats[static_cast<std::size_t>(i)]);
  }

  Var attr_bn = attributes_.batch_norm(t, t.concat_rows(attr_rows), training);

  // Phase two: attribute scores, fusion, and the mask decoder's pre-norm
  // pixel rows, again stacked for the decoder's batch norm.
  std::vector<Var> mask_rows(static_cast<std::size_t>(B));
  for (int i = 0; i < B; ++i) {
    auto& sf = g.samples[static_cast<std::size_t>(i)];
    sf.attrs = attributes_.post_norm(t, t.slice_rows(attr_bn, i, 1),
                                     dropout_rng, training);
    sf.fused = afe_.fuse(t, feats[static_cast<std::size_t>(i)], sf.attrs,
                         sf.fix);
    mask_rows[static_cast<std::size_t>(i)] = mask_.decode_tokens(t, sf.fused);
  }

  Var mask_bn = mask_.batch_norm(t, t.concat_rows(mask_rows), training);

  // Phase three: finish each mask, then form the batch-mean loss parts.
  Var mask_acc{}, fix_acc{}, attr_acc{}, consist_acc{};
  for (int i = 0; i < B; ++i) {
    const CamouflageSample& s = *batch[static_cast<std::size_t>(i)];
    auto& sf = g.samples[static_cast<std::size_t>(i)];
    const int g2 = sf.fused.grid_rows * sf.fused.grid_cols;
    sf.mask = mask_.finish(t, t.slice_rows(mask_bn, i * g2, g2),
                           sf.fused.grid_rows, sf.fused.grid_cols, size);

    MaskLossParts ml = mask_loss(t, sf.mask, s.gt_mask);
    FixationLossParts fl = fixation_loss(
        t, sf.fix,
        downsample_fixation(s.gt_fixation, sf.fix.rows, sf.fix.cols));
    Var al = attribute_loss(t, sf.attrs, s.attr_gt);

    mask_acc = i == 0 ? ml.total : t.add(mask_acc, ml.total);
    fix_acc = i == 0 ? fl.total : t.add(fix_acc, fl.total);
    attr_acc = i == 0 ? al : t.add(attr_acc, al);
    if (use_text) {
      Var v = projectors_.project_visual(t, sf.fused);
      Var u = projectors_.project_text(t, text_->encode(t, s.description));
      Var cl = consistency_loss(t, v, u);
      consist_acc = i == 0 ? cl : t.add(consist_acc, cl);
    }
  }

  const double inv_b = 1.0 / B;
  Var mask_mean = t.scalar_mul(mask_acc, inv_b);
  Var fix_mean = t.scalar_mul(fix_acc, inv_b);
  Var attr_mean = t.scalar_mul(attr_acc, inv_b);
  Var consist_mean =
      use_text ? t.scalar_mul(consist_acc, inv_b) : Var{};

  g.loss_node = total_loss_node(t, mask_mean, fix_mean, attr_mean,
                                consist_mean, cfg_.weights);
  g.breakdown = total_loss(
      t.val(mask_mean)(0, 0), t.val(fix_mean)(0, 0), t.val(attr_mean)(0, 0),
      use_text ? t.val(consist_mean)(0, 0) : 0.0, cfg_.weights);
  return g;
}

InferenceResult AcumenModel::infer(const Image& img) const {
  const int size = cfg_.image_size();
  const Image scaled =
      (img.h == size && img.w == size) ? img : resize_image(img, size, size);

  Tape t;
  std::mt19937_64 unused_rng(0);  // dropout is inert outside training
  MultiLevelFeatures feats = backbone_.encode(t, scaled);
  FixationMap fix = fixation_.predict(t, feats);
  AttributeScores attrs =
      attributes_.predict(t, feats, unused_rng, /*training=*/false);
  FusedFeature fused = afe_.fuse(t, feats, attrs, fix);
  MaskLogits mask = mask_.predict(t, fused, size, /*training=*/false);

  InferenceResult out;
  out.mask_prob = column_to_grid(t.val(mask.prob), size, size);
  out.fixation = column_to_grid(t.val(fix.prob), fix.rows, fix.cols);
  out.attr_proportions = attribute_proportions(t.val(attrs.raw));
  return out;
}

}  // namespace acumen
