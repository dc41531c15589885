// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "acumen/autograd.hpp"

namespace acumen {

/// Checkpoint sidecar data: training progress, the canonical config text
/// and its hash, and a metric snapshot. `skipped` is filled by the loader
/// with stored parameter names the receiving model does not declare (for
/// example the text encoder's table in a visual-only inference build).
struct CheckpointMeta {
  int epoch = 0;
  int step = 0;
  int adam_t = 0;
  std::string config_hash;
  std::string config_text;
  std::map<std::string, double> metrics;
  std::vector<std::string> skipped;
};

// Checkpoint files start with the magic "ACKPT001", then a little-endian
// u32 JSON header length and the header itself, then per parameter (in the
// header's order) the value matrix and, for trainable parameters, the Adam
// moments, all as row-major little-endian float64.
//
// save_checkpoint writes to "<path>.tmp" and renames, so a crashed save
// never leaves a partial file under the final name. save -> load -> save
// is byte-identical.
void save_checkpoint(const std::string& path, const ParamStore& ps,
                     const CheckpointMeta& meta);

/// Overwrites matching parameters in `ps` from the file. Every parameter in
/// `ps` must be present with matching shape (shape mismatch means the model
/// was built from a different config); stored parameters absent from `ps`
/// are collected into the returned meta's `skipped`.
CheckpointMeta load_checkpoint(const std::string& path, ParamStore& ps);

/// Reads just the header (for config recovery and inspection).
CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace acumen
