// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#include "acumen/taxonomy.hpp"

#include <fstream>
#include <set>

namespace acumen {

AttributeTaxonomy AttributeTaxonomy::defaults() {
  AttributeTaxonomy t;
  const std::pair<const char*, const char*> defs[] = {
      // Surrounding factors.
      {"environmental_pattern_matching", "SF"},
      {"color_matching", "SF"},
      {"environmental_shading", "SF"},
      {"environmental_textures", "SF"},
      {"background_clutter", "SF"},
      {"partial_occlusion", "SF"},
      // Object-self factors.
      {"shape_mimicry", "COF"},
      {"texture_mimicry", "COF"},
      {"edge_disruption", "COF"},
      {"self_shadow_concealment", "COF"},
      {"posture_adaptation", "COF"},
      {"appendage_concealment", "COF"},
      {"countershading", "COF"},
      // Imaging quality factors.
      {"low_resolution", "IQF"},
      {"motion_blur", "IQF"},
      {"low_contrast", "IQF"},
      {"poor_illumination", "IQF"},
  };
  for (const auto& [name, cat] : defs) {
    t.attributes.emplace_back(name);
    t.categories.emplace_back(cat);
  }
  t.validate();
  return t;
}

AttributeTaxonomy AttributeTaxonomy::load(const std::string& path) {
  std::ifstream in(path);
  ACUMEN_CHECK(in.good(), "cannot open taxonomy file: " << path);
  AttributeTaxonomy t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    ACUMEN_CHECK(eq != std::string::npos,
                 path << ":" << lineno << ": expected 'attribute = category'");
    t.attributes.push_back(trim(line.substr(0, eq)));
    t.categories.push_back(trim(line.substr(eq + 1)));
  }
  t.validate();
  return t;
}

void AttributeTaxonomy::save(const std::string& path) const {
  std::ofstream out(path);
  ACUMEN_CHECK(out.good(), "cannot write taxonomy file: " << path);
  out << "# attribute = category (SF | COF | IQF)\n";
  for (std::size_t i = 0; i < attributes.size(); ++i)
    out << attributes[i] << " = " << categories[i] << "\n";
}

void AttributeTaxonomy::validate() const {
  ACUMEN_CHECK(attributes.size() == kAttributeCount,
               "taxonomy must list exactly " << kAttributeCount
                                             << " attributes, got "
                                             << attributes.size());
  ACUMEN_CHECK(categories.size() == attributes.size(),
               "taxonomy category list length mismatch");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    ACUMEN_CHECK(!attributes[i].empty(), "empty attribute name at index " << i);
    ACUMEN_CHECK(seen.insert(attributes[i]).second,
                 "duplicate attribute: " << attributes[i]);
    ACUMEN_CHECK(categories[i] == "SF" || categories[i] == "COF" ||
                     categories[i] == "IQF",
                 "attribute " << attributes[i] << " has unknown category "
                              << categories[i]);
  }
}

int AttributeTaxonomy::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i] == name) return static_cast<int>(i);
  return -1;
}

}  // namespace acumen
