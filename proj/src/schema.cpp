#include "sofanet/schema.hpp"

#include "sofanet/rng.hpp"

namespace sofanet {

int FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

std::string FeatureSchema::schema_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < names.size(); ++i) {
    h = fnv1a64(names[i], h);
    h = fnv1a64(":", h);
    h = fnv1a64(units[i], h);
    h = fnv1a64(";", h);
  }
  return to_hex64(h);
}

std::size_t FeatureSchema::count(FeatureKind k) const {
  std::size_t n = 0;
  for (FeatureKind kk : kinds)
    if (kk == k) ++n;
  return n;
}

const FeatureSchema& standard_schema() {
  static const FeatureSchema schema = [] {
    FeatureSchema s;
    auto add = [&s](const char* name, const char* unit, FeatureKind kind) {
      s.names.emplace_back(name);
      s.units.emplace_back(unit);
      s.kinds.push_back(kind);
    };
    add("Age", "years", FeatureKind::Demographic);
    add("Gender", "flag", FeatureKind::Demographic);
    add("ICU_hours", "hours", FeatureKind::Demographic);

    add("HR", "beats/min", FeatureKind::Vital);
    add("Temp", "degC", FeatureKind::Vital);
    add("SBP", "mmHg", FeatureKind::Vital);
    add("MAP", "mmHg", FeatureKind::Vital);
    add("DBP", "mmHg", FeatureKind::Vital);
    add("Resp", "breaths/min", FeatureKind::Vital);

    add("FiO2", "fraction", FeatureKind::Laboratory);
    add("SaO2", "%", FeatureKind::Laboratory);
    add("pH", "pH", FeatureKind::Laboratory);
    add("AST", "U/L", FeatureKind::Laboratory);
    add("BUN", "mg/dL", FeatureKind::Laboratory);
    add("Calcium", "mg/dL", FeatureKind::Laboratory);
    add("Chloride", "mmol/L", FeatureKind::Laboratory);
    add("Creatinine", "mg/dL", FeatureKind::Laboratory);
    add("Glucose", "mg/dL", FeatureKind::Laboratory);
    add("Potassium", "mmol/L", FeatureKind::Laboratory);
    add("TotalBilirubin", "mg/dL", FeatureKind::Laboratory);
    add("Hct", "%", FeatureKind::Laboratory);
    add("Hgb", "g/dL", FeatureKind::Laboratory);
    add("PTT", "s", FeatureKind::Laboratory);
    add("WBC", "10^3/uL", FeatureKind::Laboratory);
    add("Platelets", "10^3/uL", FeatureKind::Laboratory);
    add("BUN_CR", "ratio", FeatureKind::Laboratory);
    add("SaO2_FiO2", "ratio", FeatureKind::Laboratory);
    return s;
  }();
  return schema;
}

}  // namespace sofanet
