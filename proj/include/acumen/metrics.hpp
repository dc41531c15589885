// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "acumen/common.hpp"

namespace acumen {

/// Segmentation quality measures. All take a prediction in [0,1] and a
/// strictly binary ground truth of the same shape and return a scalar in
/// [0,1]. Internals follow the metrics' published reference algorithms;
/// fixed conventions beyond them:
///   - the enhanced-alignment measure is averaged over the 256 binarization
///     thresholds k/256, k = 1..256, with each sweep step taking the exact
///     per-pixel mean of the enhanced alignment matrix, so scores stay in
///     [0,1] and a perfect binary prediction scores 1;
///   - an all-zero ground truth yields weighted F-measure 0;
///   - nearest-boundary ties in the weighted F-measure's distance transform
///     resolve to the smallest row-major linear index.
double mae(const Mat& pred, const Mat& gt);
double s_measure(const Mat& pred, const Mat& gt);
double e_measure_mean(const Mat& pred, const Mat& gt);
double f_beta_w(const Mat& pred, const Mat& gt);

struct MetricRecord {
  double s = 0.0;
  double e = 0.0;
  double fw = 0.0;
  double mae = 0.0;
};

MetricRecord evaluate_pair(const Mat& pred, const Mat& gt);

}  // namespace acumen
