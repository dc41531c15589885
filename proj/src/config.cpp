// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace acumen {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  ACUMEN_CHECK(used == value.size() && !value.empty(),
               "config key '" << key << "': invalid integer '" << value
                              << "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  ACUMEN_CHECK(used == value.size() && !value.empty(),
               "config key '" << key << "': invalid number '" << value
                              << "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  ACUMEN_CHECK(false, "config key '" << key << "': invalid boolean '" << value
                                     << "'");
  return false;
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : value) {
    if (ch == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

// Shortest decimal text that round-trips the double.
std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  ACUMEN_CHECK(ec == std::errc(), "double formatting failed");
  return std::string(buf, end);
}

void apply_key(TrainConfig& cfg, const std::string& key,
               const std::string& value) {
  if (key == "epochs") {
    cfg.epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "lr") {
    cfg.lr = parse_double(key, value);
  } else if (key == "lr_decay_factor") {
    cfg.lr_decay_factor = parse_double(key, value);
  } else if (key == "lr_decay_epoch") {
    cfg.lr_decay_epoch = static_cast<int>(parse_int(key, value));
  } else if (key == "batch_size") {
    cfg.batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "max_steps") {
    cfg.max_steps = static_cast<int>(parse_int(key, value));
  } else if (key == "hflip") {
    cfg.hflip = parse_bool(key, value);
  } else if (key == "shuffle") {
    cfg.shuffle = parse_bool(key, value);
  } else if (key == "alpha") {
    cfg.weights.alpha = parse_double(key, value);
  } else if (key == "beta") {
    cfg.weights.beta = parse_double(key, value);
  } else if (key == "gamma") {
    cfg.weights.gamma = parse_double(key, value);
  } else if (key == "image_size") {
    cfg.backbone.image_size = static_cast<int>(parse_int(key, value));
  } else if (key == "patch_size") {
    cfg.backbone.patch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "channels") {
    cfg.backbone.channels = static_cast<int>(parse_int(key, value));
  } else if (key == "depth") {
    cfg.backbone.depth = static_cast<int>(parse_int(key, value));
  } else if (key == "heads") {
    cfg.backbone.heads = static_cast<int>(parse_int(key, value));
  } else if (key == "taps") {
    const auto parts = split_commas(value);
    ACUMEN_CHECK(parts.size() == 3,
                 "config key 'taps': expected three comma-separated block "
                 "indices, got '"
                     << value << "'");
    for (int i = 0; i < 3; ++i)
      cfg.backbone.tap_layers[static_cast<std::size_t>(i)] =
          static_cast<int>(parse_int(key, parts[static_cast<std::size_t>(i)]));
  } else if (key == "cls_token") {
    cfg.backbone.cls_token = parse_bool(key, value);
  } else if (key == "frozen_backbone") {
    cfg.backbone.frozen = parse_bool(key, value);
  } else if (key == "text_dim") {
    cfg.backbone.text_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "text_vocab") {
    cfg.backbone.text_vocab = static_cast<int>(parse_int(key, value));
  } else if (key == "max_words") {
    cfg.backbone.max_words = static_cast<int>(parse_int(key, value));
  } else if (key == "fixation_blocks") {
    cfg.fixation.blocks = static_cast<int>(parse_int(key, value));
  } else if (key == "fixation_heads") {
    cfg.fixation.heads = static_cast<int>(parse_int(key, value));
  } else if (key == "fixation_hidden") {
    cfg.fixation.hidden = static_cast<int>(parse_int(key, value));
  } else if (key == "fixation_conv_ksize") {
    cfg.fixation.conv_ksize = static_cast<int>(parse_int(key, value));
  } else if (key == "attr_hidden") {
    cfg.attribute.hidden = static_cast<int>(parse_int(key, value));
  } else if (key == "attr_dropout") {
    cfg.attribute.dropout = parse_double(key, value);
  } else if (key == "afe_weights") {
    const auto parts = split_commas(value);
    ACUMEN_CHECK(parts.size() == 3,
                 "config key 'afe_weights': expected three comma-separated "
                 "weights, got '"
                     << value << "'");
    for (int i = 0; i < 3; ++i)
      cfg.afe.branch_weights[static_cast<std::size_t>(i)] =
          parse_double(key, parts[static_cast<std::size_t>(i)]);
  } else if (key == "se_reduction") {
    cfg.afe.se_reduction = static_cast<int>(parse_int(key, value));
  } else if (key == "mask_blocks") {
    cfg.mask.blocks = static_cast<int>(parse_int(key, value));
  } else if (key == "mask_heads") {
    cfg.mask.heads = static_cast<int>(parse_int(key, value));
  } else if (key == "mask_hidden") {
    cfg.mask.hidden = static_cast<int>(parse_int(key, value));
  } else if (key == "shared_dim") {
    cfg.objective.shared_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "proj_hidden") {
    cfg.objective.hidden = static_cast<int>(parse_int(key, value));
  } else {
    ACUMEN_CHECK(false, "unknown config key '" << key << "'");
  }
}

}  // namespace

void TrainConfig::validate() const {
  ACUMEN_CHECK(epochs >= 1, "epochs must be >= 1, got " << epochs);
  ACUMEN_CHECK(lr > 0.0, "lr must be positive, got " << lr);
  ACUMEN_CHECK(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0,
               "lr_decay_factor must be in (0,1], got " << lr_decay_factor);
  ACUMEN_CHECK(lr_decay_epoch >= 0 && lr_decay_epoch < epochs,
               "lr_decay_epoch must satisfy 0 <= decay epoch < epochs, got "
                   << lr_decay_epoch << " with " << epochs << " epochs");
  ACUMEN_CHECK(batch_size >= 1, "batch_size must be >= 1, got " << batch_size);
  ACUMEN_CHECK(max_steps >= 0, "max_steps must be >= 0, got " << max_steps);
  ACUMEN_CHECK(attribute.dropout >= 0.0 && attribute.dropout < 1.0,
               "attr_dropout must be in [0,1), got " << attribute.dropout);
  ACUMEN_CHECK(fixation.blocks >= 1, "fixation_blocks must be >= 1");
  ACUMEN_CHECK(mask.blocks >= 1, "mask_blocks must be >= 1");
  ACUMEN_CHECK(objective.shared_dim >= 1, "shared_dim must be >= 1");
  weights.validate();
  backbone.validate();
  afe.validate();
}

double learning_rate_at(const TrainConfig& cfg, int epoch) {
  ACUMEN_CHECK(epoch >= 1, "epoch index is 1-based, got " << epoch);
  return epoch <= cfg.lr_decay_epoch ? cfg.lr : cfg.lr * cfg.lr_decay_factor;
}

TrainConfig parse_config(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    ACUMEN_CHECK(eq != std::string::npos,
                 "config line " << lineno << ": expected 'key = value', got '"
                                << line << "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    ACUMEN_CHECK(!key.empty(), "config line " << lineno << ": empty key");
    apply_key(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  ACUMEN_CHECK(in.good(), "cannot open config file: " << path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_text(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "# training\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "lr = " << format_double(cfg.lr) << "\n";
  out << "lr_decay_factor = " << format_double(cfg.lr_decay_factor) << "\n";
  out << "lr_decay_epoch = " << cfg.lr_decay_epoch << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "max_steps = " << cfg.max_steps << "\n";
  out << "hflip = " << (cfg.hflip ? "true" : "false") << "\n";
  out << "shuffle = " << (cfg.shuffle ? "true" : "false") << "\n";
  out << "# loss weights\n";
  out << "alpha = " << format_double(cfg.weights.alpha) << "\n";
  out << "beta = " << format_double(cfg.weights.beta) << "\n";
  out << "gamma = " << format_double(cfg.weights.gamma) << "\n";
  out << "# backbone\n";
  out << "image_size = " << cfg.backbone.image_size << "\n";
  out << "patch_size = " << cfg.backbone.patch_size << "\n";
  out << "channels = " << cfg.backbone.channels << "\n";
  out << "depth = " << cfg.backbone.depth << "\n";
  out << "heads = " << cfg.backbone.heads << "\n";
  out << "taps = " << cfg.backbone.tap_layers[0] << ","
      << cfg.backbone.tap_layers[1] << "," << cfg.backbone.tap_layers[2]
      << "\n";
  out << "cls_token = " << (cfg.backbone.cls_token ? "true" : "false") << "\n";
  out << "frozen_backbone = " << (cfg.backbone.frozen ? "true" : "false")
      << "\n";
  out << "text_dim = " << cfg.backbone.text_dim << "\n";
  out << "text_vocab = " << cfg.backbone.text_vocab << "\n";
  out << "max_words = " << cfg.backbone.max_words << "\n";
  out << "# fixation decoder\n";
  out << "fixation_blocks = " << cfg.fixation.blocks << "\n";
  out << "fixation_heads = " << cfg.fixation.heads << "\n";
  out << "fixation_hidden = " << cfg.fixation.hidden << "\n";
  out << "fixation_conv_ksize = " << cfg.fixation.conv_ksize << "\n";
  out << "# attribute head\n";
  out << "attr_hidden = " << cfg.attribute.hidden << "\n";
  out << "attr_dropout = " << format_double(cfg.attribute.dropout) << "\n";
  out << "# attribute-fixation fusion\n";
  out << "afe_weights = " << format_double(cfg.afe.branch_weights[0]) << ","
      << format_double(cfg.afe.branch_weights[1]) << ","
      << format_double(cfg.afe.branch_weights[2]) << "\n";
  out << "se_reduction = " << cfg.afe.se_reduction << "\n";
  out << "# mask decoder\n";
  out << "mask_blocks = " << cfg.mask.blocks << "\n";
  out << "mask_heads = " << cfg.mask.heads << "\n";
  out << "mask_hidden = " << cfg.mask.hidden << "\n";
  out << "# projection heads\n";
  out << "shared_dim = " << cfg.objective.shared_dim << "\n";
  out << "proj_hidden = " << cfg.objective.hidden << "\n";
  return out.str();
}

std::string config_hash(const TrainConfig& cfg) {
  const std::uint64_t h = fnv1a64(config_to_text(cfg));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace acumen
