#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sofanet/mat.hpp"
#include "sofanet/schema.hpp"

namespace sofanet {

// Missing cells are NaN; everything else is an observed value.
inline bool is_missing(double v) { return std::isnan(v); }
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

// One ICU stay: an m x F hourly matrix plus the first hour at which sepsis
// is present, when any.
struct PatientSeries {
  std::string patient_id;
  Mat rows;  // m x F
  std::optional<std::size_t> onset_hour;

  std::size_t hours() const { return rows.rows; }
};

struct Cohort {
  FeatureSchema schema;
  std::vector<PatientSeries> patients;
  std::vector<double> feature_means;  // over observed cells; 0 for all-missing features

  std::size_t size() const { return patients.size(); }
};

// A labeled 6-hour slice. x is fully imputed; dx holds hour-over-hour
// differences with a zero first row. sofa_labels are the four mandatory
// system scores (coagulation, liver, cardiovascular, renal) at the
// window's last hour.
struct WindowSample {
  std::string patient_id;
  std::size_t start_hour = 0;
  Mat x;   // window x F
  Mat dx;  // window x F
  int sepsis_label = 0;
  std::array<int, 4> sofa_labels{0, 0, 0, 0};
};

}  // namespace sofanet
