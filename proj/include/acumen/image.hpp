// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "acumen/common.hpp"

namespace acumen {

/// RGB raster with pixel rows in row-major order: rgb is (h*w) x 3, values
/// in [0,1], row index y*w + x.
struct Image {
  int h = 0;
  int w = 0;
  Mat rgb;
};

enum class Interp { kNearest, kLinear, kArea };

// Grayscale rasters are H x W Eigen matrices with values in [0,1].
Image load_image_rgb(const std::string& path);
Mat load_gray(const std::string& path);

void save_gray_png8(const std::string& path, const Mat& gray01);
void save_image_png(const std::string& path, const Image& img);

Image resize_image(const Image& img, int h, int w);
Mat resize_gray(const Mat& gray, int h, int w, Interp interp);

// Gaussian blur with kernel size derived from sigma; sigma <= 0 is identity.
Mat gaussian_blur(const Mat& gray, double sigma);

// Mean filter with an odd square kernel and same-size zero-phase output;
// border handled by edge replication.
Mat box_mean(const Mat& gray, int ksize);

}  // namespace acumen
