// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "acumen/afe.hpp"
#include "acumen/attributes.hpp"
#include "acumen/backbone.hpp"
#include "acumen/fixation.hpp"
#include "acumen/mask.hpp"
#include "acumen/objective.hpp"

namespace acumen {

/// Full experiment configuration. The defaults are the full-scale recipe:
/// 336x336 input, taps (8, 16, 24), three fixation decoder blocks, one mask
/// decoder block, 50-word descriptions, lr 1e-4 decayed by 0.2 after epoch
/// 150, 200 epochs.
struct TrainConfig {
  int epochs = 200;
  double lr = 1e-4;
  double lr_decay_factor = 0.2;
  int lr_decay_epoch = 150;  // lr holds through this epoch, decays after it
  int batch_size = 8;
  std::uint64_t seed = 1;
  int max_steps = 0;  // 0 = no step cap
  bool hflip = true;  // horizontal-flip augmentation (training only)
  bool shuffle = true;

  LossWeights weights;
  BackboneConfig backbone;
  FixationConfig fixation;
  AttributeConfig attribute;
  AFEConfig afe;
  MaskDecoderConfig mask;
  ObjectiveConfig objective;

  int image_size() const { return backbone.image_size; }
  void validate() const;
};

/// lr for a 1-based epoch index: cfg.lr through lr_decay_epoch, then
/// cfg.lr * cfg.lr_decay_factor for every later epoch.
double learning_rate_at(const TrainConfig& cfg, int epoch);

// Config files are "key = value" lines; '#' starts a comment and blank
// lines are ignored. Unknown keys are errors. parse_config applies the
// lines on top of the defaults.
TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::string& path);

/// Canonical serialization: every key in a fixed order. parse_config on the
/// result reproduces the config exactly.
std::string config_to_text(const TrainConfig& cfg);

/// FNV-1a hash of the canonical text, as 16 lowercase hex digits.
std::string config_hash(const TrainConfig& cfg);

}  // namespace acumen
