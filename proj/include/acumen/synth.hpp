// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "acumen/dataset.hpp"

namespace acumen {

struct SynthConfig {
  int canvas = 64;
  // Fixation stand-in = mask blurred with sigma = canvas * this fraction,
  // renormalized. Zero means the fixation equals the normalized mask.
  double fixation_sigma_frac = 0.125;
  std::string split = "train";
};

/// Writes n synthetic camouflage samples under out_dir (images/, masks/,
/// fixations/ plus manifest.jsonl) and returns the manifest. Each sample is a
/// textured background with a foreground blob filled by a perturbed copy of
/// the same texture; attribute proportions derive from the generator knobs.
/// Pure function of (n, seed, cfg): reruns are byte-identical.
DatasetManifest synth_generate(int n, std::uint64_t seed,
                               const SynthConfig& cfg,
                               const std::string& out_dir,
                               const AttributeTaxonomy& taxonomy);

}  // namespace acumen
