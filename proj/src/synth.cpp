// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/synth.hpp"

#include <cmath>
#include <filesystem>
#include <random>

namespace acumen {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Rgb {
  double r, g, b;
};

enum class Pattern { kStriped, kCheckered, kSpeckled };
enum class Shape { kRound, kOblong, kRagged };

const char* pattern_word(Pattern p) {
  switch (p) {
    case Pattern::kStriped: return "striped";
    case Pattern::kCheckered: return "checkered";
    case Pattern::kSpeckled: return "speckled";
  }
  return "";
}

const char* shape_word(Shape s) {
  switch (s) {
    case Shape::kRound: return "round";
    case Shape::kOblong: return "oblong";
    case Shape::kRagged: return "ragged";
  }
  return "";
}

// Deterministic per-pixel noise in [0,1): pure function of coordinates and
// salt, independent of traversal order.
double pixel_noise(int x, int y, std::uint64_t salt) {
  std::uint64_t h = salt;
  h = fnv1a64(&x, sizeof(x), h);
  h = fnv1a64(&y, sizeof(y), h);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// All the knobs one sample is generated from. Attribute proportions are
// deterministic functions of these values.
struct SampleKnobs {
  Rgb base;
  Pattern pattern;
  Shape shape;
  double freq;          // texture spatial frequency (cycles per canvas)
  double angle;         // texture orientation
  double phase;         // texture phase
  double amp;           // texture contrast amplitude
  double noise_amp;     // speckle amplitude
  double shading;       // vignette strength
  double similarity;    // foreground texture reuse in [0.6, 0.95]
  double tint_shift;    // foreground brightness offset magnitude
  double cx, cy;        // blob center (canvas fraction)
  double radius;        // blob mean radius (canvas fraction)
  double aspect;        // blob axis ratio
  double blob_angle;    // blob orientation
  double wobble;        // radial wobble amplitude
  double wobble_ph1, wobble_ph2;
  bool occluded;        // a background bar crosses the blob
  double occl_pos;      // bar position across the blob (fraction)
  std::uint64_t salt;
};

SampleKnobs draw_knobs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampleKnobs k;
  k.base = {0.25 + 0.5 * u(rng), 0.25 + 0.5 * u(rng), 0.25 + 0.5 * u(rng)};
  k.pattern = static_cast<Pattern>(static_cast<int>(u(rng) * 3.0) % 3);
  k.shape = static_cast<Shape>(static_cast<int>(u(rng) * 3.0) % 3);
  k.freq = 3.0 + 6.0 * u(rng);
  k.angle = 2.0 * kPi * u(rng);
  k.phase = 2.0 * kPi * u(rng);
  k.amp = 0.10 + 0.15 * u(rng);
  k.noise_amp = 0.02 + 0.10 * u(rng);
  k.shading = 0.25 * u(rng);
  k.similarity = 0.60 + 0.35 * u(rng);
  k.tint_shift = 0.12 * u(rng);
  k.cx = 0.35 + 0.30 * u(rng);
  k.cy = 0.35 + 0.30 * u(rng);
  k.radius = 0.16 + 0.10 * u(rng);
  k.aspect = k.shape == Shape::kOblong ? 1.6 + 0.8 * u(rng)
                                       : 1.0 + 0.25 * u(rng);
  k.blob_angle = 2.0 * kPi * u(rng);
  k.wobble = k.shape == Shape::kRagged ? 0.18 + 0.14 * u(rng)
                                       : 0.02 + 0.06 * u(rng);
  k.wobble_ph1 = 2.0 * kPi * u(rng);
  k.wobble_ph2 = 2.0 * kPi * u(rng);
  k.occluded = u(rng) < 0.3;
  k.occl_pos = 0.3 + 0.4 * u(rng);
  k.salt = rng();
  return k;
}

Rgb texture_at(const SampleKnobs& k, double x, double y, int canvas,
               bool foreground) {
  const double nx = x / canvas;
  const double ny = y / canvas;
  // Foreground reuses the same pattern with a small phase slip; the
  // similarity knob blends between reuse and a flat alien tint.
  double phase = k.phase + (foreground ? 0.6 : 0.0);
  const double u =
      2.0 * kPi * k.freq * (nx * std::cos(k.angle) + ny * std::sin(k.angle));
  const double v =
      2.0 * kPi * k.freq * (-nx * std::sin(k.angle) + ny * std::cos(k.angle));
  double wave = 0.0;
  switch (k.pattern) {
    case Pattern::kStriped: wave = std::sin(u + phase); break;
    case Pattern::kCheckered: wave = std::sin(u + phase) * std::sin(v); break;
    case Pattern::kSpeckled: wave = 0.4 * std::sin(u + phase); break;
  }
  const double speckle_gain = k.pattern == Pattern::kSpeckled ? 3.0 : 1.0;
  const double noise =
      speckle_gain * k.noise_amp *
      (pixel_noise(static_cast<int>(x), static_cast<int>(y), k.salt) - 0.5);
  const double vignette =
      1.0 - k.shading * ((nx - 0.5) * (nx - 0.5) + (ny - 0.5) * (ny - 0.5)) * 4.0;

  auto channel = [&](double base, double waviness) {
    double val = (base + k.amp * wave * waviness + noise) * vignette;
    if (foreground) {
      const double alien = base > 0.5 ? base - 0.35 : base + 0.35;
      val = k.similarity * val + (1.0 - k.similarity) * alien;
      val += k.tint_shift;
    }
    return std::min(1.0, std::max(0.0, val));
  };
  return {channel(k.base.r, 1.0), channel(k.base.g, 0.8),
          channel(k.base.b, 0.6)};
}

bool inside_blob(const SampleKnobs& k, double x, double y, int canvas) {
  const double dx = x / canvas - k.cx;
  const double dy = y / canvas - k.cy;
  const double ca = std::cos(k.blob_angle), sa = std::sin(k.blob_angle);
  const double ax = (dx * ca + dy * sa) * k.aspect;
  const double ay = -dx * sa + dy * ca;
  const double dist = std::sqrt(ax * ax + ay * ay);
  const double ang = std::atan2(ay, ax);
  const double r = k.radius * (1.0 + k.wobble * std::sin(3.0 * ang + k.wobble_ph1) +
                               0.5 * k.wobble * std::sin(5.0 * ang + k.wobble_ph2));
  if (dist > r) return false;
  if (k.occluded) {
    // A background-textured bar hides part of the object.
    const double band = (ax * 0.3 + ay) - (k.occl_pos - 0.5) * 2.0 * r;
    if (std::abs(band) < 0.18 * r) return false;
  }
  return true;
}

Eigen::VectorXd knob_attributes(const SampleKnobs& k,
                                const AttributeTaxonomy& taxonomy) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(kAttributeCount, 0.01);
  auto set = [&](const char* name, double v) {
    const int i = taxonomy.index_of(name);
    if (i >= 0) w(i) = std::max(0.0, v);
  };
  set("environmental_pattern_matching", 1.4 * (k.similarity - 0.5));
  set("color_matching", 0.9 * (1.0 - k.tint_shift / 0.12) * k.similarity);
  set("environmental_shading", 1.2 * k.shading);
  set("environmental_textures", 2.5 * k.noise_amp);
  set("background_clutter",
      k.pattern == Pattern::kSpeckled ? 3.5 * k.noise_amp : 1.0 * k.noise_amp);
  set("partial_occlusion", k.occluded ? 0.45 : 0.01);
  set("shape_mimicry", k.shape == Shape::kRound ? 0.5 : 0.15);
  set("texture_mimicry", 0.8 * (k.similarity - 0.5) + 0.3 * k.amp);
  set("edge_disruption", 1.1 * k.wobble);
  set("self_shadow_concealment", 0.4 * k.shading);
  set("posture_adaptation", k.shape == Shape::kOblong ? 0.30 : 0.05);
  set("appendage_concealment", 0.5 * k.wobble);
  set("countershading", 0.35 * (1.0 - k.tint_shift / 0.12));
  set("low_resolution", 0.08);
  set("motion_blur", 0.02);
  set("low_contrast", 0.9 * (0.25 - k.amp));
  set("poor_illumination", 0.5 * k.shading);
  return renormalize_attributes(w);
}

}  // namespace

DatasetManifest synth_generate(int n, std::uint64_t seed,
                               const SynthConfig& cfg,
                               const std::string& out_dir,
                               const AttributeTaxonomy& taxonomy) {
  ACUMEN_CHECK(n >= 1, "synth_generate: n must be >= 1, got " << n);
  ACUMEN_CHECK(cfg.canvas >= 16, "synth_generate: canvas too small");
  taxonomy.validate();

  std::error_code ec;
  for (const char* sub : {"", "images", "masks", "fixations"}) {
    fs::create_directories(fs::path(out_dir) / sub, ec);
    ACUMEN_CHECK(!ec, "cannot create output directory " << out_dir << "/"
                                                        << sub << ": "
                                                        << ec.message());
  }

  DatasetManifest manifest;
  manifest.split = cfg.split;
  const int cs = cfg.canvas;

  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    const SampleKnobs k = draw_knobs(rng);

    Image img;
    img.h = cs;
    img.w = cs;
    img.rgb.resize(static_cast<long>(cs) * cs, 3);
    Mat mask(cs, cs);
    for (int y = 0; y < cs; ++y) {
      for (int x = 0; x < cs; ++x) {
        const bool fg = inside_blob(k, x, y, cs);
        const Rgb px = texture_at(k, x, y, cs, fg);
        const long idx = static_cast<long>(y) * cs + x;
        img.rgb(idx, 0) = px.r;
        img.rgb(idx, 1) = px.g;
        img.rgb(idx, 2) = px.b;
        mask(y, x) = fg ? 1.0 : 0.0;
      }
    }

    const Mat fixation = normalize_distribution(
        gaussian_blur(mask, cfg.fixation_sigma_frac * cs));

    char stem[32];
    std::snprintf(stem, sizeof(stem), "sample_%04d", i);
    const std::string image_path =
        (fs::path(out_dir) / "images" / (std::string(stem) + ".png")).string();
    const std::string mask_path =
        (fs::path(out_dir) / "masks" / (std::string(stem) + ".png")).string();
    const std::string fix_path =
        (fs::path(out_dir) / "fixations" / (std::string(stem) + ".png"))
            .string();

    save_image_png(image_path, img);
    save_gray_png8(mask_path, mask);
    // Store fixations max-scaled so 8-bit quantization keeps their shape;
    // loaders renormalize to a distribution anyway.
    const double fmax = fixation.maxCoeff();
    save_gray_png8(fix_path, fmax > 0.0 ? Mat(fixation / fmax) : fixation);

    ManifestEntry e;
    e.image_path = image_path;
    e.mask_path = mask_path;
    e.fixation_path = fix_path;
    e.description = std::string("a ") + shape_word(k.shape) + " " +
                    pattern_word(k.pattern) + " object concealed in a " +
                    pattern_word(k.pattern) + " background";
    e.attributes = knob_attributes(k, taxonomy);
    manifest.entries.push_back(std::move(e));
  }

  write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), manifest,
                 taxonomy);
  return manifest;
}

}  // namespace acumen
