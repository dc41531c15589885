// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace acumen {
namespace {

constexpr char kMagic[8] = {'A', 'C', 'K', 'P', 'T', '0', '0', '1'};

void write_matrix(std::ofstream& out, const Mat& m) {
  // Eigen stores column-major; serialize row-major so the layout note in
  // the header stays honest regardless of build options.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
}

Mat read_matrix(std::ifstream& in, Eigen::Index rows, Eigen::Index cols,
                const std::string& path) {
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      ACUMEN_CHECK(in.good(), "checkpoint truncated: " << path);
      m(r, c) = v;
    }
  return m;
}

nlohmann::ordered_json header_json(const ParamStore& ps,
                                   const CheckpointMeta& meta) {
  nlohmann::ordered_json h;
  h["format"] = std::string(kMagic, sizeof(kMagic));
  h["epoch"] = meta.epoch;
  h["step"] = meta.step;
  h["adam_t"] = meta.adam_t;
  h["config_hash"] = meta.config_hash;
  h["config_text"] = meta.config_text;
  h["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.metrics) h["metrics"][k] = v;
  h["params"] = nlohmann::ordered_json::array();
  ps.for_each([&](const Param& p) {
    nlohmann::ordered_json e;
    e["name"] = p.name;
    e["rows"] = p.value.rows();
    e["cols"] = p.value.cols();
    e["trainable"] = p.trainable;
    h["params"].push_back(std::move(e));
  });
  return h;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& ps,
                     const CheckpointMeta& meta) {
  const std::string header = header_json(ps, meta).dump();
  ACUMEN_CHECK(header.size() <= 0xffffffffu, "checkpoint header too large");

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    ACUMEN_CHECK(out.good(), "cannot open checkpoint for writing: " << tmp);
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t len = static_cast<std::uint32_t>(header.size());
    unsigned char len_le[4] = {
        static_cast<unsigned char>(len & 0xff),
        static_cast<unsigned char>((len >> 8) & 0xff),
        static_cast<unsigned char>((len >> 16) & 0xff),
        static_cast<unsigned char>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(len_le), 4);
    out.write(header.data(),
              static_cast<std::streamsize>(header.size()));
    ps.for_each([&](const Param& p) {
      write_matrix(out, p.value);
      if (p.trainable) {
        // Moments default to zero until the optimizer's first step.
        write_matrix(out, p.m.size() == p.value.size()
                              ? p.m
                              : Mat::Zero(p.value.rows(), p.value.cols()));
        write_matrix(out, p.v.size() == p.value.size()
                              ? p.v
                              : Mat::Zero(p.value.rows(), p.value.cols()));
      }
    });
    out.flush();
    ACUMEN_CHECK(out.good(), "checkpoint write failed: " << tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace {

nlohmann::ordered_json read_header(std::ifstream& in,
                                   const std::string& path) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  ACUMEN_CHECK(in.good() && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0,
               "not a checkpoint file (bad magic): " << path);
  unsigned char len_le[4];
  in.read(reinterpret_cast<char*>(len_le), 4);
  ACUMEN_CHECK(in.good(), "checkpoint truncated: " << path);
  const std::uint32_t len = static_cast<std::uint32_t>(len_le[0]) |
                            (static_cast<std::uint32_t>(len_le[1]) << 8) |
                            (static_cast<std::uint32_t>(len_le[2]) << 16) |
                            (static_cast<std::uint32_t>(len_le[3]) << 24);
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  ACUMEN_CHECK(in.good(), "checkpoint truncated: " << path);
  nlohmann::ordered_json h =
      nlohmann::ordered_json::parse(header, nullptr, false);
  ACUMEN_CHECK(!h.is_discarded(), "checkpoint header is not valid JSON: "
                                      << path);
  return h;
}

CheckpointMeta meta_from_header(const nlohmann::ordered_json& h) {
  CheckpointMeta meta;
  meta.epoch = h.at("epoch").get<int>();
  meta.step = h.at("step").get<int>();
  meta.adam_t = h.at("adam_t").get<int>();
  meta.config_hash = h.at("config_hash").get<std::string>();
  meta.config_text = h.at("config_text").get<std::string>();
  if (h.contains("metrics"))
    for (const auto& [k, v] : h.at("metrics").items())
      meta.metrics[k] = v.get<double>();
  return meta;
}

}  // namespace

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  ACUMEN_CHECK(in.good(), "cannot open checkpoint: " << path);
  return meta_from_header(read_header(in, path));
}

CheckpointMeta load_checkpoint(const std::string& path, ParamStore& ps) {
  std::ifstream in(path, std::ios::binary);
  ACUMEN_CHECK(in.good(), "cannot open checkpoint: " << path);
  const nlohmann::ordered_json h = read_header(in, path);
  CheckpointMeta meta = meta_from_header(h);

  std::size_t filled = 0;
  for (const auto& e : h.at("params")) {
    const std::string name = e.at("name").get<std::string>();
    const auto rows = e.at("rows").get<Eigen::Index>();
    const auto cols = e.at("cols").get<Eigen::Index>();
    const bool trainable = e.at("trainable").get<bool>();
    Mat value = read_matrix(in, rows, cols, path);
    Mat m, v;
    if (trainable) {
      m = read_matrix(in, rows, cols, path);
      v = read_matrix(in, rows, cols, path);
    }
    Param* p = ps.find(name);
    if (p == nullptr) {
      meta.skipped.push_back(name);
      continue;
    }
    ACUMEN_CHECK(p->value.rows() == rows && p->value.cols() == cols,
                 "checkpoint parameter '"
                     << name << "' is " << rows << "x" << cols
                     << " but the model expects " << p->value.rows() << "x"
                     << p->value.cols()
                     << " (checkpoint and model configs differ)");
    p->value = std::move(value);
    if (trainable) {
      p->m = std::move(m);
      p->v = std::move(v);
    }
    ++filled;
  }

  if (filled != ps.size()) {
    // Name the first model parameter the file never mentioned.
    std::set<std::string> stored;
    for (const auto& e : h.at("params"))
      stored.insert(e.at("name").get<std::string>());
    std::string first_missing;
    ps.for_each([&](const Param& p) {
      if (first_missing.empty() && stored.count(p.name) == 0)
        first_missing = p.name;
    });
    ACUMEN_CHECK(false, "checkpoint " << path
                                      << " does not cover the model; first "
                                         "missing parameter: "
                                      << first_missing);
  }
  return meta;
}

}  // namespace acumen
