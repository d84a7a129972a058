#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sofanet {

enum class FeatureKind { Demographic, Vital, Laboratory };

// Ordered feature list shared by every cohort: 3 demographic, 6 vital sign
// and 18 laboratory variables.
struct FeatureSchema {
  std::vector<std::string> names;
  std::vector<std::string> units;
  std::vector<FeatureKind> kinds;

  std::size_t size() const { return names.size(); }
  // -1 when absent
  int index_of(const std::string& name) const;
  std::string schema_hash() const;
  std::size_t count(FeatureKind k) const;
};

// The standard 27-feature schema.
const FeatureSchema& standard_schema();

}  // namespace sofanet
