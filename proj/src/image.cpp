// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace acumen {

namespace {

cv::Mat1d to_cv(const Mat& m) {
  cv::Mat1d out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) out(r, c) = m(r, c);
  return out;
}

Mat from_cv(const cv::Mat1d& m) {
  Mat out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
  return out;
}

int cv_interp(Interp interp) {
  switch (interp) {
    case Interp::kNearest: return cv::INTER_NEAREST;
    case Interp::kLinear: return cv::INTER_LINEAR;
    case Interp::kArea: return cv::INTER_AREA;
  }
  return cv::INTER_LINEAR;
}

}  // namespace

Image load_image_rgb(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  ACUMEN_CHECK(!bgr.empty(), "cannot decode image: " << path);
  Image img;
  img.h = bgr.rows;
  img.w = bgr.cols;
  img.rgb.resize(static_cast<long>(img.h) * img.w, 3);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      const cv::Vec3b& p = bgr.at<cv::Vec3b>(y, x);
      const long i = static_cast<long>(y) * img.w + x;
      img.rgb(i, 0) = p[2] / 255.0;
      img.rgb(i, 1) = p[1] / 255.0;
      img.rgb(i, 2) = p[0] / 255.0;
    }
  }
  return img;
}

Mat load_gray(const std::string& path) {
  cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
  ACUMEN_CHECK(!raw.empty(), "cannot decode raster: " << path);
  if (raw.channels() > 1) cv::cvtColor(raw, raw, cv::COLOR_BGR2GRAY);
  double scale = 1.0;
  if (raw.depth() == CV_8U) scale = 1.0 / 255.0;
  else if (raw.depth() == CV_16U) scale = 1.0 / 65535.0;
  cv::Mat1d d;
  raw.convertTo(d, CV_64F, scale);
  return from_cv(d);
}

void save_gray_png8(const std::string& path, const Mat& gray01) {
  cv::Mat1d d = to_cv(gray01);
  cv::Mat u8;
  d.convertTo(u8, CV_8U, 255.0);
  ACUMEN_CHECK(cv::imwrite(path, u8), "cannot write PNG: " << path);
}

void save_image_png(const std::string& path, const Image& img) {
  cv::Mat bgr(img.h, img.w, CV_8UC3);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      const long i = static_cast<long>(y) * img.w + x;
      auto clamp8 = [](double v) {
        return static_cast<uchar>(std::min(255.0, std::max(0.0, v * 255.0 + 0.5)));
      };
      bgr.at<cv::Vec3b>(y, x) =
          cv::Vec3b(clamp8(img.rgb(i, 2)), clamp8(img.rgb(i, 1)),
                    clamp8(img.rgb(i, 0)));
    }
  }
  ACUMEN_CHECK(cv::imwrite(path, bgr), "cannot write PNG: " << path);
}

Image resize_image(const Image& img, int h, int w) {
  if (h == img.h && w == img.w) return img;
  cv::Mat src(img.h, img.w, CV_64FC3);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      const long i = static_cast<long>(y) * img.w + x;
      src.at<cv::Vec3d>(y, x) =
          cv::Vec3d(img.rgb(i, 0), img.rgb(i, 1), img.rgb(i, 2));
    }
  cv::Mat dst;
  const int interp = (h < img.h) ? cv::INTER_AREA : cv::INTER_LINEAR;
  cv::resize(src, dst, cv::Size(w, h), 0, 0, interp);
  Image out;
  out.h = h;
  out.w = w;
  out.rgb.resize(static_cast<long>(h) * w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const cv::Vec3d& p = dst.at<cv::Vec3d>(y, x);
      const long i = static_cast<long>(y) * w + x;
      out.rgb(i, 0) = p[0];
      out.rgb(i, 1) = p[1];
      out.rgb(i, 2) = p[2];
    }
  return out;
}

Mat resize_gray(const Mat& gray, int h, int w, Interp interp) {
  if (h == gray.rows() && w == gray.cols()) return gray;
  cv::Mat1d src = to_cv(gray);
  cv::Mat1d dst;
  cv::resize(src, dst, cv::Size(w, h), 0, 0, cv_interp(interp));
  return from_cv(dst);
}

Mat gaussian_blur(const Mat& gray, double sigma) {
  if (sigma <= 0.0) return gray;
  cv::Mat1d src = to_cv(gray);
  cv::Mat1d dst;
  int k = static_cast<int>(std::ceil(sigma * 6.0)) | 1;
  cv::GaussianBlur(src, dst, cv::Size(k, k), sigma, sigma,
                   cv::BORDER_REPLICATE);
  return from_cv(dst);
}

Mat box_mean(const Mat& gray, int ksize) {
  ACUMEN_CHECK(ksize >= 1 && ksize % 2 == 1,
               "box_mean kernel must be odd, got " << ksize);
  if (ksize == 1) return gray;
  cv::Mat1d src = to_cv(gray);
  cv::Mat1d dst;
  cv::blur(src, dst, cv::Size(ksize, ksize), cv::Point(-1, -1),
           cv::BORDER_REPLICATE);
  return from_cv(dst);
}

}  // namespace acumen
