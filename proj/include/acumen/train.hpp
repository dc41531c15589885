// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "acumen/checkpoint.hpp"
#include "acumen/metrics.hpp"
#include "acumen/model.hpp"

namespace acumen {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment optimizer over every trainable parameter in the store.
/// Iteration follows the store's name order, so updates are reproducible.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(ParamStore& ps, double lr);

  int t() const { return t_; }
  void set_t(int t) { t_ = t; }  // checkpoint restore

 private:
  AdamConfig cfg_;
  int t_ = 0;
};

struct TrainResult {
  std::vector<LossBreakdown> step_losses;
  std::vector<double> step_lrs;
  int steps = 0;
  int epochs_completed = 0;
  bool nan_abort = false;
  std::string final_checkpoint;  // last successfully written checkpoint
  std::string log_path;
};

struct TrainOptions {
  std::string out_dir;  // empty = no checkpoints, no log file
  std::function<void(int step, int epoch, const LossBreakdown&)> on_step;
};

/// Runs the configured training loop over the manifest's samples (loaded
/// up front, serially). Writes one JSON line per step with fields
/// {step, epoch, lr, mask, fix, attr, consist, total} to train_log.jsonl
/// and a checkpoint after every epoch; a non-finite loss aborts the run and
/// leaves the last finished epoch's checkpoint in place.
TrainResult train_model(AcumenModel& model, ParamStore& ps,
                        const TrainConfig& cfg,
                        const DatasetManifest& manifest,
                        const TrainOptions& opt);

/// Convenience wrapper: builds the store, the model (text branch included),
/// and the optimizer from the config, then trains.
TrainResult run_training(const TrainConfig& cfg,
                         const DatasetManifest& manifest,
                         const std::string& out_dir);

struct EvalRecord {
  std::string image_path;
  MetricRecord metrics;
  Eigen::VectorXd attr_proportions;
  Mat fixation;  // model's fixation grid, sums to 1
  bool skipped = false;
  std::string note;
};

struct EvalReport {
  std::vector<EvalRecord> records;
  MetricRecord mean;  // over evaluated records
  int evaluated = 0;
  int skipped = 0;
};

/// Predictor seam: maps a loaded sample to a mask probability raster at the
/// sample's resolution. Tests inject oracles; the CLI wraps a model.
using MaskPredictor = std::function<Mat(const CamouflageSample&)>;

/// Scores every manifest entry with the four mask metrics. Entries whose
/// rasters fail to load are skipped with a note and counted.
EvalReport evaluate_manifest(const DatasetManifest& manifest, int image_size,
                             const MaskPredictor& predict);

/// Full-model evaluation: mask metrics plus per-image attribute proportions
/// and fixation grids.
EvalReport evaluate_model(const AcumenModel& model,
                          const DatasetManifest& manifest);

/// Flips a loaded sample left-to-right (image, mask, and fixation).
CamouflageSample hflip_sample(const CamouflageSample& s);

}  // namespace acumen
