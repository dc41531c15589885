# Copyright (c) 2026 ACUMEN-CPP contributors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the golden corpus for the segmentation metrics.

Writes 8-bit grayscale pred/gt PNG pairs plus a JSON file of expected metric
values into tests/golden/. The metric code here is an independent NumPy/SciPy
implementation of the same published definitions as the C++ library, kept
deliberately separate so the two can cross-check each other:

  - structure measure: 0.5 * object term + 0.5 * region term, sample (n-1)
    statistics, centroid rounded half away from zero in 1-based coordinates;
  - enhanced-alignment measure: mean over thresholds k/256 (k = 1..256) of the
    per-pixel mean of the enhanced alignment matrix;
  - weighted F-measure: beta^2 = 1, errors copied from the nearest foreground
    pixel (squared-Euclidean nearest, ties to the smallest row-major linear
    index), 7x7 sigma-5 Gaussian smoothing with zero padding, exponential
    background decay 2 - exp(ln(0.5)/5 * dist); all-zero ground truth -> 0;
  - MAE: plain mean absolute difference.

Run from the repository root:  python3 scripts/make_metric_goldens.py
"""

import json
import math
import os

import cv2
import numpy as np
import scipy.ndimage

EPS = float(np.finfo(np.float64).eps)


def matlab_round(x):
    """Round half away from zero (inputs here are non-negative)."""
    return int(math.floor(x + 0.5))


# ---------------------------------------------------------------- metrics


def mae(pred, gt):
    return float(np.abs(pred - gt).mean())


def _object_score(values):
    n = values.size
    if n == 0:
        return 0.0
    x = float(values.mean())
    sigma = float(values.std(ddof=1)) if n > 1 else 0.0
    return 2.0 * x / (x * x + 1.0 + sigma + EPS)


def _s_object(pred, gt):
    fg = pred * gt
    bg = (1.0 - pred) * (1.0 - gt)
    u = float(gt.mean())
    return u * _object_score(fg[gt > 0]) + (1.0 - u) * _object_score(bg[gt == 0])


def _block_ssim(p, g):
    n = p.size
    if n == 0:
        return 0.0
    x = float(p.mean())
    y = float(g.mean())
    if n > 1:
        sx = float(p.var(ddof=1))
        sy = float(g.var(ddof=1))
        sxy = float(((p - x) * (g - y)).sum() / (n - 1))
    else:
        sx = sy = sxy = 0.0
    alpha = 4.0 * x * y * sxy
    beta = (x * x + y * y) * (sx + sy)
    if alpha != 0.0:
        return alpha / (beta + EPS)
    if beta == 0.0:
        return 1.0
    return 0.0


def _s_region(pred, gt):
    rows, cols = gt.shape
    total = float(gt.sum())
    if total == 0.0:
        cx = matlab_round(cols / 2.0)
        cy = matlab_round(rows / 2.0)
    else:
        ii = np.arange(1, cols + 1, dtype=np.float64)
        jj = np.arange(1, rows + 1, dtype=np.float64)
        cx = matlab_round(float((gt.sum(axis=0) * ii).sum()) / total)
        cy = matlab_round(float((gt.sum(axis=1) * jj).sum()) / total)
    area = float(rows * cols)
    w1 = (cx * cy) / area
    w2 = ((cols - cx) * cy) / area
    w3 = (cx * (rows - cy)) / area
    w4 = 1.0 - w1 - w2 - w3
    q = w1 * _block_ssim(pred[:cy, :cx], gt[:cy, :cx])
    q += w2 * _block_ssim(pred[:cy, cx:], gt[:cy, cx:])
    q += w3 * _block_ssim(pred[cy:, :cx], gt[cy:, :cx])
    q += w4 * _block_ssim(pred[cy:, cx:], gt[cy:, cx:])
    return q


def s_measure(pred, gt):
    y = float(gt.mean())
    if y == 0.0:
        return 1.0 - float(pred.mean())
    if y == 1.0:
        return float(pred.mean())
    return max(0.5 * _s_object(pred, gt) + 0.5 * _s_region(pred, gt), 0.0)


def e_measure_mean(pred, gt):
    n = gt.size
    gsum = float(gt.sum())
    mu_gt = float(gt.mean())
    acc = 0.0
    for k in range(1, 257):
        fm = (pred >= k / 256.0).astype(np.float64)
        if gsum == 0.0:
            enh = 1.0 - fm
        elif gsum == float(n):
            enh = fm
        else:
            af = fm - fm.mean()
            ag = gt - mu_gt
            align = 2.0 * ag * af / (ag * ag + af * af + EPS)
            enh = (align + 1.0) ** 2 / 4.0
        acc += float(enh.sum()) / n
    return acc / 256.0


def f_beta_w(pred, gt):
    if float(gt.sum()) == 0.0:
        return 0.0
    fg = np.argwhere(gt > 0)  # row-major order, so argmin ties pick the
    bg = np.argwhere(gt == 0)  # smallest linear index
    err = np.abs(pred - gt)
    err_t = err.copy()
    dist = np.zeros(len(bg), dtype=np.float64)
    if len(bg) > 0:
        fr = fg[:, 0].astype(np.int64)
        fc = fg[:, 1].astype(np.int64)
        nearest = np.empty(len(bg), dtype=np.int64)
        for s in range(0, len(bg), 512):
            br = bg[s : s + 512, 0].astype(np.int64)[:, None]
            bc = bg[s : s + 512, 1].astype(np.int64)[:, None]
            d2 = (br - fr[None, :]) ** 2 + (bc - fc[None, :]) ** 2
            k = np.argmin(d2, axis=1)
            nearest[s : s + 512] = k
            dist[s : s + 512] = np.sqrt(d2[np.arange(len(k)), k].astype(np.float64))
        err_t[bg[:, 0], bg[:, 1]] = err[fg[nearest, 0], fg[nearest, 1]]

    xs = np.arange(-3, 4, dtype=np.float64)
    kern = np.exp(-(xs[:, None] ** 2 + xs[None, :] ** 2) / (2.0 * 25.0))
    kern /= kern.sum()
    ea = scipy.ndimage.correlate(err_t, kern, mode="constant", cval=0.0)

    min_e_ea = err.copy()
    sel = (gt > 0) & (ea < err)
    min_e_ea[sel] = ea[sel]

    b = np.ones_like(gt, dtype=np.float64)
    if len(bg) > 0:
        b[bg[:, 0], bg[:, 1]] = 2.0 - np.exp(math.log(0.5) / 5.0 * dist)
    ew = min_e_ea * b

    gsum = float(gt.sum())
    ew_fg = float(ew[gt > 0].sum())
    ew_bg = float(ew[gt == 0].sum())
    tpw = gsum - ew_fg
    recall = 1.0 - ew_fg / gsum
    precision = tpw / (EPS + tpw + ew_bg)
    return 2.0 * recall * precision / (EPS + recall + precision)


# ------------------------------------------------------------- case corpus


def quantize(p):
    """Float [0,1] image -> uint8, rounding half away from zero."""
    return np.clip(np.floor(p * 255.0 + 0.5), 0, 255).astype(np.uint8)


def square_mask(h, w, r0, r1, c0, c1):
    m = np.zeros((h, w), dtype=np.uint8)
    m[r0:r1, c0:c1] = 255
    return m


def ellipse_mask(h, w, cy, cx, ry, rx):
    yy, xx = np.mgrid[0:h, 0:w]
    m = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    return (m * 255).astype(np.uint8)


def blur01(m, sigma):
    return np.clip(
        cv2.GaussianBlur(m.astype(np.float64) / 255.0, (0, 0), sigma), 0.0, 1.0
    )


def build_cases():
    rng = np.random.default_rng(20260819)
    cases = []

    gt_sq = square_mask(64, 64, 16, 48, 16, 48)
    cases.append(("identity_square", gt_sq.copy(), gt_sq))
    cases.append(("complement_square", 255 - gt_sq, gt_sq))
    cases.append(("half_constant", np.full((64, 64), 128, np.uint8), gt_sq))

    grad = quantize(np.tile(np.linspace(0.0, 1.0, 64), (64, 1)))
    cases.append(("allzero_gt", grad, np.zeros((64, 64), np.uint8)))
    cases.append(("allones_gt", grad, np.full((64, 64), 255, np.uint8)))

    gt_rect = ellipse_mask(48, 80, 22, 45, 14, 24)
    cases.append(("rect_blob", quantize(blur01(gt_rect, 3.0)), gt_rect))

    gt_tall = ellipse_mask(80, 48, 50, 20, 22, 12)
    noisy = np.clip(blur01(gt_tall, 2.0) + 0.12 * rng.standard_normal((80, 48)), 0, 1)
    cases.append(("rect_tall_noisy", quantize(noisy), gt_tall))

    cases.append(
        ("offset_squares", square_mask(48, 48, 14, 34, 14, 34), square_mask(48, 48, 10, 30, 10, 30))
    )

    gt_dot = np.zeros((33, 47), np.uint8)
    gt_dot[16, 23] = 255
    cases.append(("small_dot", quantize(blur01(gt_dot, 4.0) * 4.0), gt_dot))

    gt_two = np.zeros((33, 47), np.uint8)
    gt_two[16, 10] = 255
    gt_two[16, 36] = 255
    cases.append(("two_dots_tie", grad[:33, :47].copy(), gt_two))

    gt_chk = np.zeros((16, 16), np.uint8)
    gt_chk[(np.add.outer(np.arange(16), np.arange(16)) % 2) == 0] = 255
    cases.append(("checkerboard", quantize(gt_chk / 255.0 * 0.7 + 0.2), gt_chk))

    gt_blob = ellipse_mask(64, 64, 30, 34, 18, 13)
    noisy2 = np.clip(blur01(gt_blob, 2.5) + 0.15 * rng.standard_normal((64, 64)), 0, 1)
    cases.append(("noisy_blob", quantize(noisy2), gt_blob))

    stair = quantize(np.tile(np.linspace(0.0, 1.0, 40), (40, 1)).T)
    cases.append(("staircase", stair, square_mask(40, 40, 0, 40, 20, 40)))

    gt_tiny = square_mask(8, 8, 3, 5, 3, 5)
    cases.append(("tiny_graded", quantize(blur01(gt_tiny, 1.0)), gt_tiny))

    gt_line = np.zeros((40, 40), np.uint8)
    gt_line[20, :] = 255
    cases.append(("thin_line", quantize(blur01(gt_line, 1.5) * 2.0), gt_line))

    gt_corner = square_mask(40, 40, 0, 7, 0, 7)
    cases.append(("corner_block", quantize(blur01(gt_corner, 2.0)), gt_corner))

    gt_sparse = (rng.random((32, 32)) < 0.1).astype(np.uint8) * 255
    if gt_sparse.sum() == 0:
        gt_sparse[5, 5] = 255
    cases.append(("sparse_noise", quantize(rng.random((32, 32))), gt_sparse))

    gt_bottom = square_mask(32, 56, 16, 32, 0, 56)
    vgrad = quantize(np.tile(np.linspace(0.0, 1.0, 32)[:, None], (1, 56)))
    cases.append(("vertical_gradient", vgrad, gt_bottom))

    gt_b2 = ellipse_mask(56, 56, 28, 26, 16, 20)
    cases.append(("gray_identity", quantize(gt_b2 / 255.0 * 0.9 + 0.05), gt_b2))

    gt_big = ellipse_mask(96, 96, 44, 50, 28, 20)
    noisy3 = np.clip(blur01(gt_big, 4.0) + 0.1 * rng.standard_normal((96, 96)), 0, 1)
    cases.append(("large_blob", quantize(noisy3), gt_big))

    return cases


def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out_dir = os.path.join(root, "tests", "golden")
    os.makedirs(out_dir, exist_ok=True)

    records = []
    for name, pred_u8, gt_u8 in build_cases():
        assert pred_u8.shape == gt_u8.shape
        assert set(np.unique(gt_u8)).issubset({0, 255})
        pred_path = os.path.join(out_dir, f"{name}_pred.png")
        gt_path = os.path.join(out_dir, f"{name}_gt.png")
        assert cv2.imwrite(pred_path, pred_u8)
        assert cv2.imwrite(gt_path, gt_u8)

        pred = pred_u8.astype(np.float64) / 255.0
        gt = (gt_u8 > 127).astype(np.float64)
        records.append(
            {
                "name": name,
                "pred": f"{name}_pred.png",
                "gt": f"{name}_gt.png",
                "s": s_measure(pred, gt),
                "e": e_measure_mean(pred, gt),
                "fw": f_beta_w(pred, gt),
                "mae": mae(pred, gt),
            }
        )
        print(
            f"{name:20s} S={records[-1]['s']:.12f} E={records[-1]['e']:.12f} "
            f"Fw={records[-1]['fw']:.12f} MAE={records[-1]['mae']:.12f}"
        )

    with open(os.path.join(out_dir, "metrics_golden.json"), "w") as f:
        json.dump({"cases": records}, f, indent=1)
    print(f"wrote {len(records)} cases to {out_dir}")


if __name__ == "__main__":
    main()
