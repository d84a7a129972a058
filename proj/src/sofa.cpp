#include "sofanet/sofa.hpp"

#include <string>

#include "sofanet/errors.hpp"

namespace sofanet {

namespace {

void require_nonneg(double v, const char* what) {
  if (v < 0.0) throw NegativeInput(std::string(what) + " must be non-negative");
}

}  // namespace

int score_coagulation(double platelets) {
  require_nonneg(platelets, "platelets");
  if (platelets >= 150.0) return 0;
  if (platelets >= 100.0) return 1;
  if (platelets >= 50.0) return 2;
  if (platelets >= 20.0) return 3;
  return 4;
}

int score_liver(double total_bilirubin) {
  require_nonneg(total_bilirubin, "total bilirubin");
  if (total_bilirubin < 1.2) return 0;
  if (total_bilirubin < 2.0) return 1;
  if (total_bilirubin < 6.0) return 2;
  if (total_bilirubin < 12.0) return 3;
  return 4;
}

int score_cardiovascular(double map, std::optional<double> dopamine, std::optional<double> dobutamine,
                         std::optional<double> epinephrine, std::optional<double> norepinephrine) {
  require_nonneg(map, "MAP");
  const double dopa = dopamine.value_or(0.0);
  const double dobu = dobutamine.value_or(0.0);
  const double epi = epinephrine.value_or(0.0);
  const double norepi = norepinephrine.value_or(0.0);
  require_nonneg(dopa, "dopamine");
  require_nonneg(dobu, "dobutamine");
  require_nonneg(epi, "epinephrine");
  require_nonneg(norepi, "norepinephrine");

  if (dopa > 15.0 || epi > 0.1 || norepi > 0.1) return 4;
  if (dopa > 5.0 || epi > 0.0 || norepi > 0.0) return 3;
  if (dopa > 0.0 || dobu > 0.0) return 2;
  return map < 70.0 ? 1 : 0;
}

int score_renal(double creatinine, std::optional<double> urine_output) {
  require_nonneg(creatinine, "creatinine");
  int cr_score = 0;
  if (creatinine >= 5.0)
    cr_score = 4;
  else if (creatinine >= 3.5)
    cr_score = 3;
  else if (creatinine >= 2.0)
    cr_score = 2;
  else if (creatinine >= 1.2)
    cr_score = 1;

  int urine_score = 0;
  if (urine_output) {
    require_nonneg(*urine_output, "urine output");
    if (*urine_output < 200.0)
      urine_score = 4;
    else if (*urine_output < 500.0)
      urine_score = 3;
  }
  return cr_score > urine_score ? cr_score : urine_score;
}

int score_respiration(double pf_ratio, bool respiratory_support) {
  require_nonneg(pf_ratio, "PaO2/FiO2");
  if (pf_ratio >= 400.0) return 0;
  if (pf_ratio >= 300.0) return 1;
  if (pf_ratio >= 200.0) return 2;
  if (!respiratory_support) return 2;  // 3-4 need support evidence
  if (pf_ratio >= 100.0) return 3;
  return 4;
}

int score_cns(int gcs) {
  if (gcs < 3 || gcs > 15) throw OutOfRange("GCS must lie in [3,15]");
  if (gcs == 15) return 0;
  if (gcs >= 13) return 1;
  if (gcs >= 10) return 2;
  if (gcs >= 6) return 3;
  return 4;
}

SystemScores score_inputs(const SofaInputs& in) {
  SystemScores s;
  s.coagulation = score_coagulation(in.platelets);
  s.liver = score_liver(in.total_bilirubin);
  s.cardiovascular =
      score_cardiovascular(in.map, in.dopamine, in.dobutamine, in.epinephrine, in.norepinephrine);
  s.renal = score_renal(in.creatinine, in.urine_output);
  if (in.pf_ratio) s.respiration = score_respiration(*in.pf_ratio, in.respiratory_support.value_or(false));
  if (in.gcs) s.cns = score_cns(*in.gcs);
  return s;
}

std::vector<SystemScores> score_series(const PatientSeries& imputed, const FeatureSchema& schema) {
  const int platelets = schema.index_of("Platelets");
  const int bilirubin = schema.index_of("TotalBilirubin");
  const int map = schema.index_of("MAP");
  const int creatinine = schema.index_of("Creatinine");
  if (platelets < 0) throw MissingFeature("schema lacks Platelets");
  if (bilirubin < 0) throw MissingFeature("schema lacks TotalBilirubin");
  if (map < 0) throw MissingFeature("schema lacks MAP");
  if (creatinine < 0) throw MissingFeature("schema lacks Creatinine");
  const int pf = schema.index_of("PF_ratio");
  const int gcs = schema.index_of("GCS");

  std::vector<SystemScores> out;
  out.reserve(imputed.hours());
  for (std::size_t t = 0; t < imputed.hours(); ++t) {
    const double* row = imputed.rows[t];
    SofaInputs in;
    in.platelets = row[platelets];
    in.total_bilirubin = row[bilirubin];
    in.map = row[map];
    in.creatinine = row[creatinine];
    if (pf >= 0) in.pf_ratio = row[pf];
    if (gcs >= 0) in.gcs = static_cast<int>(row[gcs]);
    out.push_back(score_inputs(in));
  }
  return out;
}

std::vector<std::array<int, 4>> mandatory_scores(const PatientSeries& imputed,
                                                 const FeatureSchema& schema) {
  std::vector<std::array<int, 4>> out;
  const std::vector<SystemScores> scores = score_series(imputed, schema);
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(s.mandatory());
  return out;
}

}  // namespace sofanet
