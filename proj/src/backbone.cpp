// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/backbone.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace acumen {

using nlohmann::json;

std::array<int, 3> BackboneConfig::default_taps(int depth) {
  return {(depth + 2) / 3, (2 * depth + 2) / 3, depth};
}

void BackboneConfig::validate() const {
  ACUMEN_CHECK(image_size > 0 && patch_size > 0 &&
                   image_size % patch_size == 0,
               "image size " << image_size << " not divisible by patch size "
                             << patch_size);
  ACUMEN_CHECK(channels > 0 && depth > 0 && heads > 0 &&
                   channels % heads == 0,
               "invalid channels/depth/heads");
  ACUMEN_CHECK(tap_layers[0] >= 1 && tap_layers[0] < tap_layers[1] &&
                   tap_layers[1] < tap_layers[2] && tap_layers[2] <= depth,
               "tap layers must be strictly increasing and <= depth, got ("
                   << tap_layers[0] << ", " << tap_layers[1] << ", "
                   << tap_layers[2] << ") with depth " << depth);
  ACUMEN_CHECK(text_dim > 0 && text_vocab > 0 && max_words > 0,
               "invalid text encoder dims");
}

VisualBackbone::VisualBackbone(ParamStore& ps, const BackboneConfig& cfg,
                               std::mt19937_64& rng)
    : cfg_(cfg) {
  cfg_.validate();
  const bool train = !cfg_.frozen;
  const int patch_dim = cfg_.patch_size * cfg_.patch_size * 3;
  patch_embed_ =
      Linear(ps, "backbone.patch_embed", patch_dim, cfg_.channels, rng, train);
  if (cfg_.cls_token)
    cls_ = &ps.create("backbone.cls",
                      normal_init(1, cfg_.channels, 0.02, rng), train);
  positions_ = sinusoidal_positions(cfg_.token_count(), cfg_.channels);
  blocks_.reserve(static_cast<std::size_t>(cfg_.depth));
  for (int i = 0; i < cfg_.depth; ++i)
    blocks_.emplace_back(ps, "backbone.blocks." + std::to_string(i),
                         cfg_.channels, cfg_.heads, 4 * cfg_.channels, rng,
                         train);
}

Mat VisualBackbone::patchify(const Image& img, int patch_size) {
  ACUMEN_CHECK(img.h == img.w && img.h % patch_size == 0,
               "patchify: image " << img.h << "x" << img.w
                                  << " incompatible with patch "
                                  << patch_size);
  const int side = img.h / patch_size;
  const int pd = patch_size * patch_size * 3;
  Mat rows(static_cast<long>(side) * side, pd);
  for (int py = 0; py < side; ++py) {
    for (int px = 0; px < side; ++px) {
      const long out_row = static_cast<long>(py) * side + px;
      int col = 0;
      for (int y = 0; y < patch_size; ++y) {
        for (int x = 0; x < patch_size; ++x) {
          const long pix = static_cast<long>(py * patch_size + y) * img.w +
                           (px * patch_size + x);
          rows(out_row, col++) = img.rgb(pix, 0);
          rows(out_row, col++) = img.rgb(pix, 1);
          rows(out_row, col++) = img.rgb(pix, 2);
        }
      }
    }
  }
  return rows;
}

MultiLevelFeatures VisualBackbone::encode(Tape& t, const Image& img) const {
  ACUMEN_CHECK(img.h == cfg_.image_size && img.w == cfg_.image_size,
               "backbone expects " << cfg_.image_size << "x"
                                   << cfg_.image_size << ", got " << img.h
                                   << "x" << img.w);
  return encode_tokens(t, t.leaf(patchify(img, cfg_.patch_size)));
}

MultiLevelFeatures VisualBackbone::encode_tokens(Tape& t,
                                                 Var patch_rows) const {
  const int side = cfg_.grid_side();
  ACUMEN_CHECK(t.val(patch_rows).rows() == static_cast<long>(side) * side,
               "encode_tokens: expected " << side * side << " patch rows, got "
                                          << t.val(patch_rows).rows());
  Var x = patch_embed_.forward(t, patch_rows);
  if (cls_) x = t.concat_rows({t.param(*cls_), x});
  x = t.add(x, t.leaf(positions_));

  MultiLevelFeatures f;
  f.grid_rows = side;
  f.grid_cols = side;
  f.cls_present = cfg_.cls_token;
  int next = 0;
  for (int i = 0; i < cfg_.depth; ++i) {
    x = blocks_[static_cast<std::size_t>(i)].forward(t, x);
    if (next < 3 && i + 1 == cfg_.tap_layers[static_cast<std::size_t>(next)])
      f.levels[static_cast<std::size_t>(next++)] = x;
  }
  ACUMEN_CHECK(next == 3, "tap layers did not all fire");
  return f;
}

TextEncoder::TextEncoder(ParamStore& ps, const BackboneConfig& cfg,
                         std::mt19937_64& rng)
    : cfg_(cfg) {
  embedding_ = &ps.create(
      "text.embedding",
      normal_init(cfg.text_vocab, cfg.text_dim, 0.05, rng), !cfg.frozen);
}

std::vector<std::string> TextEncoder::tokenize(const std::string& text,
                                               int max_words,
                                               bool* truncated) {
  std::vector<std::string> toks;
  std::string cur;
  if (truncated) *truncated = false;
  auto flush = [&] {
    if (cur.empty()) return;
    if (static_cast<int>(toks.size()) < max_words) toks.push_back(cur);
    else if (truncated) *truncated = true;
    cur.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) flush();
    else cur.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(ch))));
  }
  flush();
  return toks;
}

Var TextEncoder::encode(Tape& t, const std::string& description,
                        bool* truncated) const {
  const std::vector<std::string> toks =
      tokenize(description, cfg_.max_words, truncated);
  // Mean pooling as a constant selection row times the embedding table keeps
  // the whole lookup differentiable w.r.t. the table.
  Mat sel = Mat::Zero(1, cfg_.text_vocab);
  if (!toks.empty()) {
    const double w = 1.0 / static_cast<double>(toks.size());
    for (const std::string& tok : toks) {
      const auto bucket = fnv1a64(tok) % static_cast<std::uint64_t>(
                                              cfg_.text_vocab);
      sel(0, static_cast<long>(bucket)) += w;
    }
  }
  return t.matmul(t.leaf(std::move(sel)), t.param(*embedding_));
}

// ---------------------------------------------------------------------------
// Feature file container
// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[9] = "ACMLF001";
}

void FeatureFile::write(const std::string& path, const FeatureFile& c) {
  ACUMEN_CHECK(c.keys.size() == c.records.size(),
               "feature file: key list and record map disagree");
  const long L = static_cast<long>(c.grid_rows) * c.grid_cols +
                 (c.cls_present ? 1 : 0);
  json header{{"format", "ACMLF001"},
              {"levels", 3},
              {"tokens", L},
              {"channels", c.channels},
              {"grid", {c.grid_rows, c.grid_cols}},
              {"cls_present", c.cls_present},
              {"dtype", "f64le"},
              {"keys", c.keys}};
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  ACUMEN_CHECK(out.good(), "cannot write feature file: " << path);
  out.write(kMagic, 8);
  const std::uint32_t hlen = static_cast<std::uint32_t>(head.size());
  out.write(reinterpret_cast<const char*>(&hlen), 4);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const std::string& key : c.keys) {
    const auto it = c.records.find(key);
    ACUMEN_CHECK(it != c.records.end(), "feature file: no record for " << key);
    for (const Mat& level : it->second) {
      ACUMEN_CHECK(level.rows() == L && level.cols() == c.channels,
                   "feature file: record " << key << " level shape "
                                           << level.rows() << "x"
                                           << level.cols() << " != " << L
                                           << "x" << c.channels);
      // Row-major on disk; Eigen default storage is column-major.
      for (long r = 0; r < level.rows(); ++r)
        for (long col = 0; col < level.cols(); ++col) {
          const double v = level(r, col);
          out.write(reinterpret_cast<const char*>(&v), 8);
        }
    }
  }
  ACUMEN_CHECK(out.good(), "short write on feature file: " << path);
}

FeatureFile FeatureFile::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  ACUMEN_CHECK(in.good(), "cannot open feature file: " << path);
  char magic[8];
  in.read(magic, 8);
  ACUMEN_CHECK(in.good() && std::memcmp(magic, kMagic, 8) == 0,
               "not a feature file: " << path);
  std::uint32_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 4);
  std::string head(hlen, '\0');
  in.read(head.data(), hlen);
  ACUMEN_CHECK(in.good(), "truncated feature file header: " << path);
  json header = json::parse(head);

  FeatureFile c;
  c.grid_rows = header.at("grid")[0].get<int>();
  c.grid_cols = header.at("grid")[1].get<int>();
  c.cls_present = header.at("cls_present").get<bool>();
  c.channels = header.at("channels").get<int>();
  c.keys = header.at("keys").get<std::vector<std::string>>();
  const long L = header.at("tokens").get<long>();
  ACUMEN_CHECK(L == static_cast<long>(c.grid_rows) * c.grid_cols +
                        (c.cls_present ? 1 : 0),
               "feature file token count inconsistent with grid: " << path);

  for (const std::string& key : c.keys) {
    std::array<Mat, 3> levels;
    for (Mat& level : levels) {
      level.resize(L, c.channels);
      for (long r = 0; r < L; ++r)
        for (long col = 0; col < c.channels; ++col) {
          double v;
          in.read(reinterpret_cast<char*>(&v), 8);
          level(r, col) = v;
        }
    }
    ACUMEN_CHECK(in.good(), "truncated feature record for " << key);
    c.records.emplace(key, std::move(levels));
  }
  return c;
}

MultiLevelFeatures FeatureFile::features(Tape& t,
                                         const std::string& key) const {
  const auto it = records.find(key);
  ACUMEN_CHECK(it != records.end(), "feature file has no record for " << key);
  MultiLevelFeatures f;
  f.grid_rows = grid_rows;
  f.grid_cols = grid_cols;
  f.cls_present = cls_present;
  for (int i = 0; i < 3; ++i)
    f.levels[static_cast<std::size_t>(i)] =
        t.leaf(it->second[static_cast<std::size_t>(i)]);
  return f;
}

}  // namespace acumen
