// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <random>
#include <vector>

#include "acumen/afe.hpp"
#include "acumen/attributes.hpp"
#include "acumen/backbone.hpp"
#include "acumen/config.hpp"
#include "acumen/dataset.hpp"
#include "acumen/fixation.hpp"
#include "acumen/mask.hpp"
#include "acumen/objective.hpp"

namespace acumen {

/// Everything the model produced for one sample on the shared tape.
struct SampleForward {
  FixationMap fix;
  AttributeScores attrs;
  FusedFeature fused;
  MaskLogits mask;
};

/// One training step's graph over the batch: per-sample forwards plus the
/// batch-mean loss node and its scalar breakdown.
struct BatchGraph {
  std::vector<SampleForward> samples;
  Var loss_node;
  LossBreakdown breakdown;  // batch means; total matches loss_node's value
};

/// Tape-free inference outputs for one image.
struct InferenceResult {
  Mat mask_prob;                     // image_size x image_size, in (0,1)
  Mat fixation;                      // grid x grid, sums to 1
  Eigen::VectorXd attr_proportions;  // 17 entries, sums to 1
};

/// The full pipeline: visual backbone -> fixation decoder + attribute head
/// -> attribute-fixation fusion -> mask decoder, plus the projection heads
/// and (optionally) the text encoder for the consistency objective.
///
/// `with_text` controls whether the text encoder exists at all; inference
/// deployments omit it and checkpoints simply skip its parameters. With the
/// consistency weight gamma at zero the text branch is never run even when
/// present, so its parameters receive no gradient.
class AcumenModel {
 public:
  AcumenModel(ParamStore& ps, const TrainConfig& cfg, std::mt19937_64& rng,
              bool with_text);

  /// Builds the batch graph in training or evaluation mode. BatchNorm
  /// layers see the whole batch at once, so a batch forward and the
  /// corresponding solo forwards agree exactly only in evaluation mode.
  BatchGraph forward_batch(Tape& t,
                           const std::vector<const CamouflageSample*>& batch,
                           std::mt19937_64& dropout_rng, bool training) const;

  /// Evaluation-mode forward for one image on a private tape.
  InferenceResult infer(const Image& img) const;

  const TrainConfig& config() const { return cfg_; }
  bool has_text_encoder() const { return text_ != nullptr; }
  const VisualBackbone& backbone() const { return backbone_; }

  /// Names the text-branch parameters (the text encoder's table and the
  /// text projection head), the set that must stay untouched when the
  /// consistency weight is zero.
  static bool is_text_param(const std::string& name);

 private:
  TrainConfig cfg_;
  VisualBackbone backbone_;
  std::unique_ptr<TextEncoder> text_;
  FixationDecoder fixation_;
  AttributeHead attributes_;
  AFE afe_;
  MaskDecoder mask_;
  Projectors projectors_;
};

}  // namespace acumen
