#pragma once

#include <array>
#include <optional>
#include <vector>

#include "sofanet/patient.hpp"

namespace sofanet {

// Per-hour inputs for the six organ-system scores. Optional members cover
// variables real cohorts often lack; scores degrade gracefully without them.
struct SofaInputs {
  double platelets = 0.0;        // 10^3/uL
  double total_bilirubin = 0.0;  // mg/dL
  double map = 0.0;              // mmHg
  double creatinine = 0.0;       // mg/dL
  std::optional<double> pf_ratio;       // PaO2/FiO2, mmHg
  std::optional<bool> respiratory_support;
  std::optional<int> gcs;               // 3..15
  std::optional<double> urine_output;   // mL/day
  std::optional<double> dopamine;       // ug/kg/min
  std::optional<double> dobutamine;
  std::optional<double> epinephrine;
  std::optional<double> norepinephrine;
};

struct SystemScores {
  int coagulation = 0;
  int liver = 0;
  int cardiovascular = 0;
  int renal = 0;
  std::optional<int> respiration;
  std::optional<int> cns;

  std::array<int, 4> mandatory() const { return {coagulation, liver, cardiovascular, renal}; }
  int mandatory_sum() const { return coagulation + liver + cardiovascular + renal; }
};

// Interval convention: half-open [low, next_low), top interval closed below
// at its printed lower bound, so every non-negative input gets exactly one
// score.
int score_coagulation(double platelets);
int score_liver(double total_bilirubin);
// Without dose data the result is capped at {0,1}.
int score_cardiovascular(double map, std::optional<double> dopamine = {},
                         std::optional<double> dobutamine = {},
                         std::optional<double> epinephrine = {},
                         std::optional<double> norepinephrine = {});
int score_renal(double creatinine, std::optional<double> urine_output = {});
// Scores 3-4 require respiratory support; without the flag the result is
// capped at 2.
int score_respiration(double pf_ratio, bool respiratory_support);
int score_cns(int gcs);

SystemScores score_inputs(const SofaInputs& in);

// One SystemScores per hour of an imputed stay. The four mandatory systems
// always score; respiration and cns only when the schema carries their
// inputs (PF_ratio / GCS columns).
std::vector<SystemScores> score_series(const PatientSeries& imputed, const FeatureSchema& schema);

// Convenience: the four mandatory scores per hour, for window labeling.
std::vector<std::array<int, 4>> mandatory_scores(const PatientSeries& imputed,
                                                 const FeatureSchema& schema);

}  // namespace sofanet
