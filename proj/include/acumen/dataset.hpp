// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "acumen/image.hpp"
#include "acumen/taxonomy.hpp"

namespace acumen {

struct ManifestEntry {
  std::string image_path;
  std::string mask_path;
  std::string fixation_path;  // empty = derive from the mask at load time
  std::string description;
  Eigen::VectorXd attributes;  // 17, renormalized to sum exactly 1
};

struct DatasetManifest {
  std::string split = "train";
  std::vector<ManifestEntry> entries;
};

/// One training-ready sample. Rasters are square target_size x target_size.
struct CamouflageSample {
  Image image;
  Mat gt_mask;      // values in {0,1}
  Mat gt_fixation;  // nonnegative, sums to 1
  std::string description;
  Eigen::VectorXd attr_gt;  // 17, sums to 1
  bool empty_mask = false;
  bool truncated_description = false;
};

// Manifest files are UTF-8 JSON Lines. An optional first record
// {"split": ...} names the split; every other line is one entry:
// {"image", "mask", "fixation"?, "description", "attributes": {name: value}}.
// Relative raster paths resolve against the manifest's directory.
DatasetManifest load_manifest(const std::string& path,
                              const AttributeTaxonomy& taxonomy);
void write_manifest(const std::string& path, const DatasetManifest& manifest,
                    const AttributeTaxonomy& taxonomy);

/// Loads and normalizes one sample: image resized to target_size, mask
/// nearest-neighbor resized then re-binarized at 0.5, fixation bilinearly
/// resized then renormalized to sum 1. Descriptions longer than
/// max_description_tokens whitespace tokens are truncated with a flag.
CamouflageSample load_sample(const ManifestEntry& entry, int target_size,
                             int max_description_tokens = 50);

struct AttributeStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population
  Eigen::VectorXd maxv;
};

AttributeStats attribute_statistics(const DatasetManifest& manifest);

// Shared normalization helpers (also used by the synthetic generator).
Mat binarize_mask(const Mat& gray, double threshold = 0.5);
Mat normalize_distribution(const Mat& gray);  // sum 1; uniform when sum == 0
Eigen::VectorXd renormalize_attributes(const Eigen::VectorXd& raw);

}  // namespace acumen
