#pragma once

#include <cstdint>
#include <string>

#include "sofanet/patient.hpp"

namespace sofanet {

struct GenConfig {
  std::size_t n_patients = 1000;
  double sepsis_prevalence = 0.20;
  double missing_rate = 0.20;
  std::size_t stay_hours_min = 24;
  std::size_t stay_hours_max = 72;
  std::uint64_t seed = 1;
  std::size_t deterioration_lead = 12;  // hours of marker drift before onset

  void validate() const;
};

// Presets with genuinely different marginals, so cross-cohort transfer has
// something to transfer across.
GenConfig mimic_like_profile();
GenConfig challenge_like_profile();

// Hourly values around healthy baselines with AR(1) noise. Septic stays
// drift platelets and MAP down, bilirubin and creatinine up from
// (onset - lead) so that the four-system score sum at onset is >= 2 before
// masking. Vital+laboratory cells are masked missing at missing_rate;
// demographics never are. Deterministic per (cfg.seed, patient_index).
PatientSeries generate_patient(const GenConfig& cfg, bool septic, std::size_t patient_index);

// round(prevalence * n) septic patients, septic flags shuffled by seed.
Cohort generate_cohort(const GenConfig& cfg);

// One <patient_id>.psv per patient; missing cells serialized as "NaN";
// values printed with enough digits to round-trip exactly.
void write_psv(const Cohort& cohort, const std::string& directory);

// Reads every *.psv in a directory into a cohort (sorted by filename).
Cohort read_psv_dir(const std::string& directory);

}  // namespace sofanet
