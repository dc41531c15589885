// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace acumen {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_pair(const Mat& pred, const Mat& gt) {
  ACUMEN_CHECK(pred.rows() == gt.rows() && pred.cols() == gt.cols(),
               "metric inputs must share a shape, got " << pred.rows() << "x"
               << pred.cols() << " vs " << gt.rows() << "x" << gt.cols());
  ACUMEN_CHECK(pred.size() > 0, "metric inputs must be non-empty");
  ACUMEN_CHECK(pred.minCoeff() >= 0.0 && pred.maxCoeff() <= 1.0,
               "prediction values must lie in [0,1]");
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    const double v = gt(i);
    ACUMEN_CHECK(v == 0.0 || v == 1.0, "ground truth must be binary, got " << v);
  }
}

// Round half away from zero; inputs here are non-negative.
long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

// Sample standard deviation of map values inside the region mask. Regions
// with fewer than two pixels get deviation zero.
double masked_sample_std(const Mat& map, const Mat& region, double region_sum,
                         double region_mean) {
  if (region_sum <= 1.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    if (region(i) != 0.0) {
      const double d = map(i) - region_mean;
      acc += d * d;
    }
  }
  return std::sqrt(acc / (region_sum - 1.0));
}

double object_score(const Mat& map, const Mat& region) {
  const double n = region.sum();
  if (n <= 0.0) return 0.0;
  const double x = (map.cwiseProduct(region)).sum() / n;
  const double sigma = masked_sample_std(map, region, n, x);
  return 2.0 * x / (x * x + 1.0 + sigma + kEps);
}

double s_object(const Mat& pred, const Mat& gt) {
  Mat fg = pred.cwiseProduct(gt);
  Mat inv = Mat::Ones(gt.rows(), gt.cols()) - gt;
  Mat bg = (Mat::Ones(pred.rows(), pred.cols()) - pred).cwiseProduct(inv);
  const double u = gt.mean();
  return u * object_score(fg, gt) + (1.0 - u) * object_score(bg, inv);
}

// Structural similarity of one region block; sample (n-1) statistics, with
// blocks of fewer than two pixels treated as having zero variance.
double block_ssim(const Mat& pred, const Mat& gt) {
  const double n = static_cast<double>(pred.size());
  if (n <= 0.0) return 0.0;
  const double x = pred.mean();
  const double y = gt.mean();
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  if (n > 1.0) {
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      const double dp = pred(i) - x;
      const double dg = gt(i) - y;
      sx += dp * dp;
      sy += dg * dg;
      sxy += dp * dg;
    }
    sx /= n - 1.0;
    sy /= n - 1.0;
    sxy /= n - 1.0;
  }
  const double alpha = 4.0 * x * y * sxy;
  const double beta = (x * x + y * y) * (sx + sy);
  if (alpha != 0.0) return alpha / (beta + kEps);
  if (beta == 0.0) return 1.0;
  return 0.0;
}

double s_region(const Mat& pred, const Mat& gt) {
  const Eigen::Index rows = gt.rows();
  const Eigen::Index cols = gt.cols();
  const double total = gt.sum();
  // Foreground centroid in 1-based coordinates.
  long cx, cy;
  if (total == 0.0) {
    cx = round_half_up(static_cast<double>(cols) / 2.0);
    cy = round_half_up(static_cast<double>(rows) / 2.0);
  } else {
    double mx = 0.0, my = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        if (gt(r, c) != 0.0) {
          mx += static_cast<double>(c + 1);
          my += static_cast<double>(r + 1);
        }
    cx = round_half_up(mx / total);
    cy = round_half_up(my / total);
  }
  const double area = static_cast<double>(rows) * static_cast<double>(cols);
  const double w1 = (static_cast<double>(cx) * static_cast<double>(cy)) / area;
  const double w2 =
      (static_cast<double>(cols - cx) * static_cast<double>(cy)) / area;
  const double w3 =
      (static_cast<double>(cx) * static_cast<double>(rows - cy)) / area;
  const double w4 = 1.0 - w1 - w2 - w3;

  auto block = [&](const Mat& m, bool top, bool left) -> Mat {
    const Eigen::Index r0 = top ? 0 : cy;
    const Eigen::Index nr = top ? cy : rows - cy;
    const Eigen::Index c0 = left ? 0 : cx;
    const Eigen::Index nc = left ? cx : cols - cx;
    if (nr <= 0 || nc <= 0) return Mat(0, 0);
    return m.block(r0, c0, nr, nc);
  };

  double q = 0.0;
  q += w1 * block_ssim(block(pred, true, true), block(gt, true, true));
  q += w2 * block_ssim(block(pred, true, false), block(gt, true, false));
  q += w3 * block_ssim(block(pred, false, true), block(gt, false, true));
  q += w4 * block_ssim(block(pred, false, false), block(gt, false, false));
  return q;
}

// One enhanced-alignment evaluation of a binarized prediction.
double e_measure_single(const Mat& fm, const Mat& gt) {
  const double n = static_cast<double>(gt.size());
  const double gsum = gt.sum();
  Mat enhanced;
  if (gsum == 0.0) {
    enhanced = Mat::Ones(fm.rows(), fm.cols()) - fm;
  } else if (gsum == n) {
    enhanced = fm;
  } else {
    const Mat af = fm.array() - fm.mean();
    const Mat ag = gt.array() - gt.mean();
    // align = 2*ag*af / (ag^2 + af^2 + eps), then a quadratic enhancement.
    Mat aligned(fm.rows(), fm.cols());
    for (Eigen::Index i = 0; i < fm.size(); ++i) {
      const double a = af(i);
      const double g = ag(i);
      aligned(i) = 2.0 * g * a / (g * g + a * a + kEps);
    }
    enhanced = ((aligned.array() + 1.0).square() / 4.0).matrix();
  }
  return enhanced.sum() / n;
}

// Nearest foreground pixel for every background pixel under squared
// Euclidean distance, ties resolved to the smallest row-major linear index.
// Returns per-pixel distance and nearest-foreground linear index (foreground
// pixels map to themselves at distance zero).
void nearest_foreground(const Mat& gt, Mat* dist, std::vector<long>* index) {
  const long rows = gt.rows();
  const long cols = gt.cols();
  dist->setZero(rows, cols);
  index->assign(static_cast<size_t>(rows * cols), 0);
  std::vector<std::vector<long>> col_rows(static_cast<size_t>(cols));
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      if (gt(r, c) != 0.0) col_rows[static_cast<size_t>(c)].push_back(r);

  auto consider = [&](long r, long c, long cand_c, long long* best_d2,
                      long* best_lin) {
    const auto& rs = col_rows[static_cast<size_t>(cand_c)];
    if (rs.empty()) return;
    const long long dc = static_cast<long long>(cand_c - c);
    auto it = std::lower_bound(rs.begin(), rs.end(), r);
    for (int side = 0; side < 2; ++side) {
      long cand_r;
      if (side == 0) {
        if (it == rs.end()) continue;
        cand_r = *it;
      } else {
        if (it == rs.begin()) continue;
        cand_r = *(it - 1);
      }
      const long long dr = static_cast<long long>(cand_r - r);
      const long long d2 = dc * dc + dr * dr;
      const long lin = cand_r * cols + cand_c;
      if (d2 < *best_d2 || (d2 == *best_d2 && lin < *best_lin)) {
        *best_d2 = d2;
        *best_lin = lin;
      }
    }
  };

  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      const long lin = r * cols + c;
      if (gt(r, c) != 0.0) {
        (*dist)(r, c) = 0.0;
        (*index)[static_cast<size_t>(lin)] = lin;
        continue;
      }
      long long best_d2 = std::numeric_limits<long long>::max();
      long best_lin = -1;
      for (long dc = 0;; ++dc) {
        const long long dc2 = static_cast<long long>(dc) * dc;
        if (best_lin >= 0 && dc2 > best_d2) break;
        bool any = false;
        if (c - dc >= 0) {
          consider(r, c, c - dc, &best_d2, &best_lin);
          any = true;
        }
        if (dc > 0 && c + dc < cols) {
          consider(r, c, c + dc, &best_d2, &best_lin);
          any = true;
        }
        if (!any && best_lin >= 0) break;
        if (!any && dc > cols) break;
      }
      (*dist)(r, c) = std::sqrt(static_cast<double>(best_d2));
      (*index)[static_cast<size_t>(lin)] = best_lin;
    }
  }
}

// 7x7 Gaussian (sigma 5), normalized, applied as zero-padded correlation.
Mat gaussian_correlate_7x5(const Mat& src) {
  double k[7][7];
  double ksum = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      const double di = static_cast<double>(i - 3);
      const double dj = static_cast<double>(j - 3);
      k[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * 25.0));
      ksum += k[i][j];
    }
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) k[i][j] /= ksum;

  const long rows = src.rows();
  const long cols = src.cols();
  Mat out(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int i = -3; i <= 3; ++i) {
        const long rr = r + i;
        if (rr < 0 || rr >= rows) continue;
        for (int j = -3; j <= 3; ++j) {
          const long cc = c + j;
          if (cc < 0 || cc >= cols) continue;
          acc += k[i + 3][j + 3] * src(rr, cc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

double mae(const Mat& pred, const Mat& gt) {
  check_pair(pred, gt);
  return (pred - gt).cwiseAbs().mean();
}

double s_measure(const Mat& pred, const Mat& gt) {
  check_pair(pred, gt);
  const double y = gt.mean();
  if (y == 0.0) return 1.0 - pred.mean();
  if (y == 1.0) return pred.mean();
  const double q = 0.5 * s_object(pred, gt) + 0.5 * s_region(pred, gt);
  return std::max(q, 0.0);
}

double e_measure_mean(const Mat& pred, const Mat& gt) {
  check_pair(pred, gt);
  double acc = 0.0;
  for (int k = 1; k <= 256; ++k) {
    const double t = static_cast<double>(k) / 256.0;
    Mat fm(pred.rows(), pred.cols());
    for (Eigen::Index i = 0; i < pred.size(); ++i)
      fm(i) = pred(i) >= t ? 1.0 : 0.0;
    acc += e_measure_single(fm, gt);
  }
  return acc / 256.0;
}

double f_beta_w(const Mat& pred, const Mat& gt) {
  check_pair(pred, gt);
  const double gsum = gt.sum();
  if (gsum == 0.0) return 0.0;

  const long rows = gt.rows();
  const long cols = gt.cols();
  Mat dst;
  std::vector<long> idx;
  nearest_foreground(gt, &dst, &idx);

  Mat e = (pred - gt).cwiseAbs();
  Mat et = e;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      if (gt(r, c) == 0.0) {
        const long src = idx[static_cast<size_t>(r * cols + c)];
        et(r, c) = e(src / cols, src % cols);
      }

  const Mat ea = gaussian_correlate_7x5(et);
  Mat min_e_ea = e;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      if (gt(r, c) != 0.0 && ea(r, c) < e(r, c)) min_e_ea(r, c) = ea(r, c);

  // Background errors decay with distance from the object.
  Mat b = Mat::Ones(rows, cols);
  const double lambda = std::log(0.5) / 5.0;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      if (gt(r, c) == 0.0) b(r, c) = 2.0 - std::exp(lambda * dst(r, c));

  const Mat ew = min_e_ea.cwiseProduct(b);
  double ew_fg = 0.0, ew_bg = 0.0;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      (gt(r, c) != 0.0 ? ew_fg : ew_bg) += ew(r, c);

  const double tpw = gsum - ew_fg;
  const double fpw = ew_bg;
  const double recall = 1.0 - ew_fg / gsum;
  const double precision = tpw / (kEps + tpw + fpw);
  return 2.0 * recall * precision / (kEps + recall + precision);
}

MetricRecord evaluate_pair(const Mat& pred, const Mat& gt) {
  MetricRecord rec;
  rec.s = s_measure(pred, gt);
  rec.e = e_measure_mean(pred, gt);
  rec.fw = f_beta_w(pred, gt);
  rec.mae = mae(pred, gt);
  return rec;
}

}  // namespace acumen
