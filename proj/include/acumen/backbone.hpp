// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "acumen/image.hpp"
#include "acumen/nn.hpp"

namespace acumen {

struct BackboneConfig {
  int image_size = 336;
  int patch_size = 14;
  int channels = 1024;  // C
  int depth = 24;
  int heads = 8;
  std::array<int, 3> tap_layers = {8, 16, 24};  // 1-based block indices
  bool cls_token = false;
  bool frozen = false;
  int text_dim = 64;     // D_t
  int text_vocab = 4096;
  int max_words = 50;    // WL

  // Taps at one third, two thirds, and the final block.
  static std::array<int, 3> default_taps(int depth);
  int grid_side() const { return image_size / patch_size; }
  int token_count() const {
    return grid_side() * grid_side() + (cls_token ? 1 : 0);
  }
  void validate() const;
};

/// Three tapped token grids from shallow to deep, all L x C on one tape.
struct MultiLevelFeatures {
  std::array<Var, 3> levels;
  int grid_rows = 0;
  int grid_cols = 0;
  bool cls_present = false;

  int tokens() const {
    return grid_rows * grid_cols + (cls_present ? 1 : 0);
  }
};

/// Patch-embedding transformer encoder with three intermediate taps.
class VisualBackbone {
 public:
  VisualBackbone(ParamStore& ps, const BackboneConfig& cfg,
                 std::mt19937_64& rng);

  /// Rows of patch pixel values, one row per patch: L x (patch^2 * 3).
  static Mat patchify(const Image& img, int patch_size);

  MultiLevelFeatures encode(Tape& t, const Image& img) const;
  MultiLevelFeatures encode_tokens(Tape& t, Var patch_rows) const;

  const BackboneConfig& config() const { return cfg_; }

 private:
  BackboneConfig cfg_;
  Linear patch_embed_;
  Param* cls_ = nullptr;
  Mat positions_;  // fixed sinusoidal table, tokens x C
  std::vector<EncoderBlock> blocks_;
};

/// Hash-bucket token embedding with mean pooling: description -> 1 x D_t.
class TextEncoder {
 public:
  TextEncoder(ParamStore& ps, const BackboneConfig& cfg,
              std::mt19937_64& rng);

  static std::vector<std::string> tokenize(const std::string& text,
                                           int max_words,
                                           bool* truncated = nullptr);

  Var encode(Tape& t, const std::string& description,
             bool* truncated = nullptr) const;

 private:
  BackboneConfig cfg_;
  Param* embedding_ = nullptr;  // vocab x D_t
};

/// Container for externally computed multi-level features (one record per
/// image key), so pretrained-backbone features can be supplied offline.
/// Binary layout: magic "ACMLF001", little-endian u32 JSON-header length,
/// the JSON header, then per record three L x C float64 arrays in row-major
/// order, record order matching the header's key list.
struct FeatureFile {
  int grid_rows = 0;
  int grid_cols = 0;
  bool cls_present = false;
  int channels = 0;
  std::vector<std::string> keys;
  std::map<std::string, std::array<Mat, 3>> records;

  static void write(const std::string& path, const FeatureFile& contents);
  static FeatureFile read(const std::string& path);

  /// Presents one stored record as constant tape features.
  MultiLevelFeatures features(Tape& t, const std::string& key) const;
};

}  // namespace acumen
