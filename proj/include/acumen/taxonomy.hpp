// Copyright (c) 2026 ACUMEN-CPP contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "acumen/common.hpp"

namespace acumen {

inline constexpr int kAttributeCount = 17;

/// The camouflage-attribute taxonomy: 17 ordered attribute identifiers,
/// each assigned to one of three categories:
///   SF  - Surrounding Factors
///   COF - Camouflaged Object-Self Factors
///   IQF - Imaging Quality Factors
struct AttributeTaxonomy {
  std::vector<std::string> attributes;  // ordered, defines vector layout
  std::vector<std::string> categories;  // parallel to attributes

  /// Built-in default list. Overridable via a config file for deployments
  /// whose annotation scheme names the attributes differently.
  static AttributeTaxonomy defaults();

  /// Loads "attribute = category" lines ('#' comments, blank lines ok).
  static AttributeTaxonomy load(const std::string& path);

  void save(const std::string& path) const;
  void validate() const;
  int index_of(const std::string& name) const;  // -1 when absent
};

}  // namespace acumen
