// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace acumen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).string();
}

std::string relativize(const std::string& base_dir, const std::string& path) {
  std::error_code ec;
  fs::path rel = fs::relative(path, base_dir, ec);
  if (ec || rel.empty()) return path;
  return rel.generic_string();
}

}  // namespace

Eigen::VectorXd renormalize_attributes(const Eigen::VectorXd& raw) {
  const double s = raw.sum();
  ACUMEN_CHECK(s > 0.0, "attribute vector sums to zero");
  return raw / s;
}

DatasetManifest load_manifest(const std::string& path,
                              const AttributeTaxonomy& taxonomy) {
  std::ifstream in(path);
  ACUMEN_CHECK(in.good(), "cannot open manifest: " << path);
  const std::string base_dir = fs::path(path).parent_path().string();

  DatasetManifest m;
  std::string line;
  int lineno = 0;
  int record = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      ACUMEN_CHECK(false, path << ":" << lineno << ": invalid JSON record: "
                               << e.what());
    }
    if (record == 0 && j.contains("split") && !j.contains("image")) {
      m.split = j.at("split").get<std::string>();
      ACUMEN_CHECK(m.split == "train" || m.split == "val" || m.split == "test",
                   path << ":" << lineno << ": unknown split '" << m.split
                        << "'");
      ++record;
      continue;
    }
    ++record;
    const std::string where =
        path + ":" + std::to_string(lineno) + ": record " +
        std::to_string(m.entries.size());

    for (const char* field : {"image", "mask", "description", "attributes"})
      ACUMEN_CHECK(j.contains(field),
                   where << " is missing required field '" << field << "'");

    ManifestEntry e;
    e.image_path = resolve(base_dir, j.at("image").get<std::string>());
    e.mask_path = resolve(base_dir, j.at("mask").get<std::string>());
    if (j.contains("fixation"))
      e.fixation_path = resolve(base_dir, j.at("fixation").get<std::string>());
    e.description = j.at("description").get<std::string>();

    const json& attrs = j.at("attributes");
    ACUMEN_CHECK(attrs.is_object(), where << ": 'attributes' must be a map");
    e.attributes.resize(kAttributeCount);
    for (int i = 0; i < kAttributeCount; ++i) {
      const std::string& name = taxonomy.attributes[static_cast<size_t>(i)];
      ACUMEN_CHECK(attrs.contains(name),
                   where << ": missing attribute '" << name << "'");
      const double v = attrs.at(name).get<double>();
      ACUMEN_CHECK(v >= 0.0, where << ": attribute '" << name
                                   << "' is negative (" << v << ")");
      e.attributes(i) = v;
    }
    for (const auto& [key, val] : attrs.items())
      ACUMEN_CHECK(taxonomy.index_of(key) >= 0,
                   where << ": unknown attribute '" << key << "'");

    const double sum = e.attributes.sum();
    ACUMEN_CHECK(sum >= 0.98 && sum <= 1.02,
                 where << ": attribute proportions sum to " << sum
                       << ", outside [0.98, 1.02]");
    e.attributes = renormalize_attributes(e.attributes);

    for (const std::string* p : {&e.image_path, &e.mask_path}) {
      ACUMEN_CHECK(fs::exists(*p), where << ": missing file " << *p);
    }
    if (!e.fixation_path.empty())
      ACUMEN_CHECK(fs::exists(e.fixation_path),
                   where << ": missing file " << e.fixation_path);
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& manifest,
                    const AttributeTaxonomy& taxonomy) {
  std::ofstream out(path);
  ACUMEN_CHECK(out.good(), "cannot write manifest: " << path);
  const std::string base_dir = fs::path(path).parent_path().string();
  out << json{{"split", manifest.split}}.dump() << "\n";
  for (const ManifestEntry& e : manifest.entries) {
    json attrs = json::object();
    for (int i = 0; i < kAttributeCount; ++i)
      attrs[taxonomy.attributes[static_cast<size_t>(i)]] = e.attributes(i);
    json j{{"image", relativize(base_dir, e.image_path)},
           {"mask", relativize(base_dir, e.mask_path)},
           {"description", e.description},
           {"attributes", attrs}};
    if (!e.fixation_path.empty())
      j["fixation"] = relativize(base_dir, e.fixation_path);
    out << j.dump() << "\n";
  }
  ACUMEN_CHECK(out.good(), "write failed for manifest: " << path);
}

Mat binarize_mask(const Mat& gray, double threshold) {
  return (gray.array() >= threshold).cast<double>();
}

Mat normalize_distribution(const Mat& gray) {
  ACUMEN_CHECK((gray.array() >= 0.0).all(),
               "distribution raster has negative values");
  const double s = gray.sum();
  if (s <= 0.0)
    return Mat::Constant(gray.rows(), gray.cols(),
                         1.0 / static_cast<double>(gray.size()));
  return gray / s;
}

CamouflageSample load_sample(const ManifestEntry& entry, int target_size,
                             int max_description_tokens) {
  ACUMEN_CHECK(target_size > 0, "target_size must be positive");
  CamouflageSample s;
  s.image = resize_image(load_image_rgb(entry.image_path), target_size,
                         target_size);

  Mat mask = load_gray(entry.mask_path);
  mask = resize_gray(mask, target_size, target_size, Interp::kNearest);
  s.gt_mask = binarize_mask(mask);
  s.empty_mask = s.gt_mask.sum() == 0.0;

  Mat fix;
  if (!entry.fixation_path.empty()) {
    fix = load_gray(entry.fixation_path);
    fix = resize_gray(fix, target_size, target_size, Interp::kLinear);
    fix = fix.cwiseMax(0.0);  // bilinear resampling cannot go negative, but
                              // keep the invariant unconditional
  } else {
    // No recorded fixation: use a blurred mask as a stand-in that keeps the
    // "object plus its surroundings" character of gaze data.
    fix = gaussian_blur(s.gt_mask, target_size / 16.0);
  }
  s.gt_fixation = normalize_distribution(fix);

  s.description = entry.description;
  std::istringstream toks(entry.description);
  std::string tok, kept;
  int count = 0;
  while (toks >> tok) {
    if (count == max_description_tokens) {
      s.truncated_description = true;
      break;
    }
    if (count > 0) kept += ' ';
    kept += tok;
    ++count;
  }
  if (s.truncated_description) s.description = kept;

  s.attr_gt = renormalize_attributes(entry.attributes);
  return s;
}

AttributeStats attribute_statistics(const DatasetManifest& manifest) {
  ACUMEN_CHECK(!manifest.entries.empty(),
               "attribute_statistics: empty manifest");
  const int n = static_cast<int>(manifest.entries.size());
  AttributeStats st;
  st.mean = Eigen::VectorXd::Zero(kAttributeCount);
  st.stddev = Eigen::VectorXd::Zero(kAttributeCount);
  st.maxv = Eigen::VectorXd::Constant(kAttributeCount,
                                      -std::numeric_limits<double>::infinity());
  for (const ManifestEntry& e : manifest.entries) {
    st.mean += e.attributes;
    st.maxv = st.maxv.cwiseMax(e.attributes);
  }
  st.mean /= n;
  for (const ManifestEntry& e : manifest.entries)
    st.stddev += (e.attributes - st.mean).cwiseAbs2();
  st.stddev = (st.stddev / n).cwiseSqrt();
  return st;
}

}  // namespace acumen
