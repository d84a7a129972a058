#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sofanet/patient.hpp"

namespace sofanet {

struct ParseResult {
  PatientSeries series;
  std::vector<std::string> unknown_columns;  // ignored header columns, recorded for the caller
};

// Pipe-separated patient file: header of column names, one line per hour,
// empty cells or the literal "NaN" marking missing values. An optional
// SepsisLabel column {0,1} yields onset_hour (first hour with 1). Header
// columns are remapped onto schema order; unknown columns are ignored.
ParseResult parse_psv(const std::string& text, const FeatureSchema& schema,
                      const std::string& patient_id = "");

// Keeps patients whose missing fraction over vital+laboratory cells is
// strictly below max_missing; recomputes feature means on the survivors.
Cohort screen_cohort(const Cohort& cohort, double max_missing = 0.8);

std::vector<double> compute_feature_means(const FeatureSchema& schema,
                                          const std::vector<PatientSeries>& patients);

// Fraction of missing cells over vital+laboratory columns for one stay.
double missing_ratio(const FeatureSchema& schema, const PatientSeries& series);

// Forward fill; a missing first hour takes the feature mean. Output has no
// missing cells.
PatientSeries impute(const PatientSeries& series, const std::vector<double>& feature_means);

// dx row 0 is zero; dx row i = x row i - x row i-1.
Mat differential(const Mat& x);

// One sample per admissible start hour k. The window must end before the
// onset hour, so no input row carries post-onset information; the label is
// onset_hour in [k+window, k+window+horizon-1]. sofa[k] are the four-system
// scores for hour k of the imputed series.
std::vector<WindowSample> make_windows(const PatientSeries& imputed,
                                       const std::vector<std::array<int, 4>>& sofa,
                                       std::size_t window = 6, std::size_t horizon = 6);

// Deterministic patient-level split; test size = round(test_frac * n), at
// least 1. Feature means are recomputed per side.
std::pair<Cohort, Cohort> split_patients(const Cohort& cohort, double test_frac, std::uint64_t seed);

// Deterministic patient-level subsample of size max(1, round(frac * n)).
Cohort subsample_patients(const Cohort& cohort, double frac, std::uint64_t seed);

// Cohort manifest: patient ids, stay lengths, onset hours, missing ratios,
// schema hash, as a JSON document.
std::string cohort_manifest_json(const Cohort& cohort);

}  // namespace sofanet
