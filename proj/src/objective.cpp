// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/objective.hpp"

#include <cmath>

namespace acumen {

void LossWeights::validate() const {
  ACUMEN_CHECK(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0,
               "loss weights must be nonnegative, got alpha=" << alpha
                                                              << " beta="
                                                              << beta
                                                              << " gamma="
                                                              << gamma);
}

Projectors::Projectors(ParamStore& ps, const BackboneConfig& backbone,
                       const ObjectiveConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg), channels_(backbone.channels), text_dim_(backbone.text_dim) {
  ACUMEN_CHECK(cfg_.shared_dim > 0, "shared_dim must be positive");
  const int vh = cfg_.hidden > 0 ? cfg_.hidden : channels_;
  const int th = cfg_.hidden > 0 ? cfg_.hidden : text_dim_;
  v1_ = Linear(ps, "proj.visual.fc1", channels_, vh, rng);
  v2_ = Linear(ps, "proj.visual.fc2", vh, cfg_.shared_dim, rng);
  t1_ = Linear(ps, "proj.text.fc1", text_dim_, th, rng);
  t2_ = Linear(ps, "proj.text.fc2", th, cfg_.shared_dim, rng);
}

Var Projectors::project_visual(Tape& t, const FusedFeature& fused) const {
  ACUMEN_CHECK(t.val(fused.tokens).cols() == channels_,
               "visual projector expects " << channels_ << " channels, got "
                                           << t.val(fused.tokens).cols());
  Var pooled = t.col_mean(fused.tokens);
  return l2_normalize_row(t, v2_.forward(t, t.gelu(v1_.forward(t, pooled))));
}

Var Projectors::project_text(Tape& t, Var text_embedding) const {
  ACUMEN_CHECK(t.val(text_embedding).rows() == 1 &&
                   t.val(text_embedding).cols() == text_dim_,
               "text projector expects 1x" << text_dim_ << ", got "
                                           << t.val(text_embedding).rows()
                                           << "x"
                                           << t.val(text_embedding).cols());
  return l2_normalize_row(
      t, t2_.forward(t, t.gelu(t1_.forward(t, text_embedding))));
}

Var l2_normalize_row(Tape& t, Var row) {
  ACUMEN_CHECK(t.val(row).rows() == 1, "l2_normalize_row expects a row");
  const double ss = t.val(row).squaredNorm();
  if (ss == 0.0) {
    Mat e1 = Mat::Zero(1, t.val(row).cols());
    e1(0, 0) = 1.0;
    return t.leaf(std::move(e1));
  }
  Var norm = t.sqrt_(t.sum_all(t.hadamard(row, row)));
  return t.div_1x1(row, norm);
}

Var consistency_loss(Tape& t, Var v, Var u) {
  ACUMEN_CHECK(t.val(v).rows() == 1 && t.val(u).rows() == 1 &&
                   t.val(v).cols() == t.val(u).cols(),
               "consistency_loss: projections must be equal-width rows");
  ACUMEN_CHECK(t.val(v).allFinite() && t.val(u).allFinite(),
               "consistency_loss: non-finite projection");
  Var dot = t.sum_all(t.hadamard(v, u));
  return t.scalar_add(t.scalar_mul(dot, -1.0), 1.0);
}

LossBreakdown total_loss(double mask, double fix, double attr, double consist,
                         const LossWeights& w) {
  w.validate();
  const struct {
    const char* name;
    double v;
  } parts[] = {{"mask", mask}, {"fix", fix}, {"attr", attr},
               {"consist", consist}};
  for (const auto& p : parts)
    ACUMEN_CHECK(!std::isnan(p.v), "total_loss: " << p.name << " is NaN");
  LossBreakdown b;
  b.mask = mask;
  b.fix = fix;
  b.attr = attr;
  b.consist = consist;
  b.total = mask + w.alpha * fix + w.beta * attr + w.gamma * consist;
  return b;
}

Var total_loss_node(Tape& t, Var mask, Var fix, Var attr, Var consist,
                    const LossWeights& w) {
  w.validate();
  Var total = t.add(t.add(mask, t.scalar_mul(fix, w.alpha)),
                    t.scalar_mul(attr, w.beta));
  if (consist.valid()) total = t.add(total, t.scalar_mul(consist, w.gamma));
  return total;
}

}  // namespace acumen
