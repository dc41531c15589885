// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0
//
// Visual backbone, text encoder, and feature-file tests.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "acumen/backbone.hpp"

using namespace acumen;

namespace {

Image random_image(std::mt19937_64& rng, int size) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Image img;
  img.h = size;
  img.w = size;
  img.rgb = Eigen::MatrixXd(size * size, 3);
  for (Eigen::Index i = 0; i < img.rgb.size(); ++i) img.rgb(i) = uni(rng);
  return img;
}

BackboneConfig toy_config() {
  BackboneConfig cfg;
  cfg.image_size = 16;
  cfg.patch_size = 4;
  cfg.channels = 24;
  cfg.depth = 6;
  cfg.heads = 4;
  cfg.tap_layers = BackboneConfig::default_taps(6);
  return cfg;
}

}  // namespace

TEST_CASE("config arithmetic: grids, token counts, default taps") {
  BackboneConfig full;  // 336 / 14 defaults
  CHECK(full.grid_side() == 24);
  CHECK(full.token_count() == 576);
  full.cls_token = true;
  CHECK(full.token_count() == 577);
  CHECK(BackboneConfig::default_taps(24) == std::array<int, 3>{8, 16, 24});
  CHECK(BackboneConfig::default_taps(6) == std::array<int, 3>{2, 4, 6});
  CHECK(BackboneConfig::default_taps(12) == std::array<int, 3>{4, 8, 12});
  CHECK(BackboneConfig::default_taps(7) == std::array<int, 3>{3, 5, 7});

  BackboneConfig bad = toy_config();
  bad.tap_layers = {4, 2, 6};  // not increasing
  CHECK_THROWS(bad.validate());
  bad = toy_config();
  bad.tap_layers = {2, 4, 9};  // beyond depth
  CHECK_THROWS(bad.validate());
  bad = toy_config();
  bad.image_size = 17;  // not divisible by patch
  CHECK_THROWS(bad.validate());
}

TEST_CASE("patchify layout: one row per patch, row-major interleaved pixels") {
  Image img;
  img.h = 4;
  img.w = 4;
  img.rgb = Eigen::MatrixXd(16, 3);
  for (int p = 0; p < 16; ++p)
    for (int c = 0; c < 3; ++c) img.rgb(p, c) = p * 10 + c;
  const Mat rows = VisualBackbone::patchify(img, 2);
  REQUIRE(rows.rows() == 4);
  REQUIRE(rows.cols() == 12);
  // Patch 0 covers pixels (0,0),(0,1),(1,0),(1,1) = linear 0,1,4,5.
  const double expect0[12] = {0, 1, 2, 10, 11, 12, 40, 41, 42, 50, 51, 52};
  for (int i = 0; i < 12; ++i) CHECK(rows(0, i) == expect0[i]);
  // Patch 3 (bottom-right) covers linear pixels 10,11,14,15.
  CHECK(rows(3, 0) == 100);
  CHECK(rows(3, 11) == 152);
}

TEST_CASE("encode yields three tap levels obeying the shape law") {
  std::mt19937_64 rng(5);
  for (bool cls : {false, true}) {
    CAPTURE(cls);
    BackboneConfig cfg = toy_config();
    cfg.cls_token = cls;
    ParamStore ps;
    std::mt19937_64 init(11);
    VisualBackbone vb(ps, cfg, init);
    Tape t;
    const MultiLevelFeatures f = vb.encode(t, random_image(rng, cfg.image_size));
    CHECK(f.grid_rows == 4);
    CHECK(f.grid_cols == 4);
    CHECK(f.cls_present == cls);
    const int want_tokens = 16 + (cls ? 1 : 0);
    CHECK(f.tokens() == want_tokens);
    for (int lvl = 0; lvl < 3; ++lvl) {
      CHECK(t.val(f.levels[lvl]).rows() == want_tokens);
      CHECK(t.val(f.levels[lvl]).cols() == cfg.channels);
    }
    // Taps are distinct transformations of the same input.
    CHECK((t.val(f.levels[0]) - t.val(f.levels[2])).cwiseAbs().maxCoeff() > 1e-9);
  }
}

TEST_CASE("frozen backbone is deterministic and exposes no trainable scalars") {
  BackboneConfig cfg = toy_config();
  cfg.frozen = true;
  ParamStore ps;
  std::mt19937_64 init(17);
  VisualBackbone vb(ps, cfg, init);
  CHECK(ps.trainable_scalar_count() == 0);

  std::mt19937_64 rng(23);
  const Image img = random_image(rng, cfg.image_size);
  Tape t1, t2;
  const MultiLevelFeatures a = vb.encode(t1, img);
  const MultiLevelFeatures b = vb.encode(t2, img);
  for (int lvl = 0; lvl < 3; ++lvl)
    CHECK(t1.val(a.levels[lvl]) == t2.val(b.levels[lvl]));  // bitwise

  // Gradients flow to activations but never bind frozen parameters.
  Tape t3;
  const MultiLevelFeatures f = vb.encode(t3, img);
  const Var s = t3.sum_all(f.levels[2]);
  t3.backward(s);
  ps.for_each([](const Param& p) {
    CHECK_FALSE(p.trainable);
    if (p.grad.size() > 0) CHECK(p.grad.cwiseAbs().maxCoeff() == 0.0);
  });
}

TEST_CASE("text encoder produces distinct embeddings and flags truncation") {
  BackboneConfig cfg = toy_config();
  ParamStore ps;
  std::mt19937_64 init(29);
  TextEncoder te(ps, cfg, init);

  std::set<std::string> seen;
  std::vector<std::string> descs = {
      "a striped beetle on mossy bark",
      "the moth rests on lichen",
      "sea horse drifting over coral sand",
      "an owl pressed against oak bark",
      "flatfish buried under silt",
      "green caterpillar along a leaf vein",
      "spider flattened on granite",
      "frog half sunk in duckweed",
      "snake coiled in dry grass",
      "crab dusted with shell fragments"};
  for (const auto& d : descs) {
    Tape t;
    bool truncated = true;
    const Var e = te.encode(t, d, &truncated);
    CHECK_FALSE(truncated);
    CHECK(t.val(e).rows() == 1);
    CHECK(t.val(e).cols() == cfg.text_dim);
    std::string sig;
    for (int i = 0; i < cfg.text_dim; ++i)
      sig += std::to_string(t.val(e)(0, i)) + ",";
    seen.insert(sig);
  }
  CHECK(seen.size() == descs.size());

  // Token budget enforcement.
  std::string lengthy;
  for (int i = 0; i < cfg.max_words + 10; ++i)
    lengthy += "word" + std::to_string(i) + " ";
  bool truncated = false;
  const auto toks = TextEncoder::tokenize(lengthy, cfg.max_words, &truncated);
  CHECK(truncated);
  CHECK(static_cast<int>(toks.size()) == cfg.max_words);

  Tape t;
  bool tflag = false;
  te.encode(t, lengthy, &tflag);
  CHECK(tflag);

  // Empty description embeds to the zero row rather than failing.
  Tape t0;
  const Var z = te.encode(t0, "   ");
  CHECK(t0.val(z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tokenizer lowercases and splits on whitespace") {
  const auto toks = TextEncoder::tokenize("  A Striped\tBeetle \n on bark ", 50);
  REQUIRE(toks.size() == 5);
  CHECK(toks[0] == "a");
  CHECK(toks[1] == "striped");
  CHECK(toks[2] == "beetle");
  CHECK(toks[3] == "on");
  CHECK(toks[4] == "bark");
}

TEST_CASE("feature files round-trip bitwise") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "acumen_featfile";
  fs::remove_all(dir);
  fs::create_directories(dir);

  BackboneConfig cfg = toy_config();
  cfg.frozen = true;
  ParamStore ps;
  std::mt19937_64 init(31);
  VisualBackbone vb(ps, cfg, init);
  std::mt19937_64 rng(37);

  FeatureFile ff;
  ff.grid_rows = cfg.grid_side();
  ff.grid_cols = cfg.grid_side();
  ff.cls_present = false;
  ff.channels = cfg.channels;
  for (const std::string key : {"sample_b", "sample_a"}) {
    Tape t;
    const MultiLevelFeatures f = vb.encode(t, random_image(rng, cfg.image_size));
    ff.keys.push_back(key);
    ff.records[key] = {t.val(f.levels[0]), t.val(f.levels[1]),
                       t.val(f.levels[2])};
  }
  const std::string path = (dir / "feats.bin").string();
  FeatureFile::write(path, ff);
  const FeatureFile back = FeatureFile::read(path);
  CHECK(back.grid_rows == ff.grid_rows);
  CHECK(back.grid_cols == ff.grid_cols);
  CHECK(back.cls_present == ff.cls_present);
  CHECK(back.channels == ff.channels);
  REQUIRE(back.keys == ff.keys);  // insertion order preserved
  for (const auto& key : ff.keys)
    for (int lvl = 0; lvl < 3; ++lvl)
      CHECK(back.records.at(key)[lvl] == ff.records.at(key)[lvl]);  // bitwise

  // Stored records re-enter a tape as constants with correct metadata.
  Tape t;
  const MultiLevelFeatures f = back.features(t, "sample_a");
  CHECK(f.tokens() == cfg.token_count());
  CHECK(t.val(f.levels[1]) == ff.records.at("sample_a")[1]);
  CHECK_THROWS(back.features(t, "missing_key"));

  fs::remove_all(dir);
}
