#include "sofanet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sofanet/errors.hpp"
#include "sofanet/pipeline.hpp"
#include "sofanet/rng.hpp"
#include "sofanet/sofa.hpp"

namespace fs = std::filesystem;

namespace sofanet {

namespace {

struct FeatureModel {
  double mean;
  double noise_sd;   // per-hour innovation
  double drift = 0;  // added at full deterioration ramp
};

// Indexed by standard_schema() order. Demographics handled separately.
const FeatureModel kModels[] = {
    {0, 0},           // Age (per patient)
    {0, 0},           // Gender (per patient)
    {0, 0},           // ICU_hours (= hour index)
    {85.0, 3.0, 18.0},    // HR
    {37.0, 0.15, 1.3},    // Temp
    {120.0, 4.0, -24.0},  // SBP
    {85.0, 2.5, -23.0},   // MAP
    {68.0, 2.5, -14.0},   // DBP
    {17.0, 1.0, 6.0},     // Resp
    {0.30, 0.02, 0.15},   // FiO2
    {97.0, 0.8, -5.0},    // SaO2
    {7.40, 0.015, -0.08}, // pH
    {30.0, 3.0, 25.0},    // AST
    {18.0, 1.5, 14.0},    // BUN
    {9.2, 0.2, -0.8},     // Calcium
    {102.0, 1.2, 3.0},    // Chloride
    {0.9, 0.06, 1.9},     // Creatinine
    {120.0, 8.0, 35.0},   // Glucose
    {4.1, 0.15, 0.6},     // Potassium
    {0.8, 0.08, 2.4},     // TotalBilirubin
    {38.0, 1.2, -4.0},    // Hct
    {12.5, 0.5, -1.5},    // Hgb
    {32.0, 1.5, 14.0},    // PTT
    {8.0, 0.8, 5.5},      // WBC
    {250.0, 12.0, -175.0},// Platelets
    {0, 0},               // BUN_CR (derived)
    {0, 0},               // SaO2_FiO2 (derived)
};

constexpr double kAr1Phi = 0.9;

double clamp_floor(double v, double lo) { return v < lo ? lo : v; }

}  // namespace

void GenConfig::validate() const {
  if (n_patients == 0) throw ConfigInvalid("n_patients must be positive");
  if (sepsis_prevalence < 0.0 || sepsis_prevalence > 1.0)
    throw ConfigInvalid("sepsis_prevalence must lie in [0,1]");
  if (missing_rate < 0.0 || missing_rate > 1.0) throw ConfigInvalid("missing_rate must lie in [0,1]");
  if (stay_hours_min == 0 || stay_hours_max < stay_hours_min)
    throw ConfigInvalid("stay hour range must be positive and ordered");
  if (deterioration_lead >= stay_hours_min)
    throw ConfigInvalid("deterioration_lead must be shorter than the minimum stay");
}

GenConfig mimic_like_profile() {
  GenConfig cfg;
  cfg.sepsis_prevalence = 0.20;
  cfg.missing_rate = 0.21;
  cfg.stay_hours_min = 24;
  cfg.stay_hours_max = 72;
  return cfg;
}

GenConfig challenge_like_profile() {
  GenConfig cfg;
  cfg.sepsis_prevalence = 0.30;
  cfg.missing_rate = 0.63;
  cfg.stay_hours_min = 24;
  cfg.stay_hours_max = 48;
  return cfg;
}

PatientSeries generate_patient(const GenConfig& cfg, bool septic, std::size_t patient_index) {
  cfg.validate();
  const FeatureSchema& schema = standard_schema();
  std::mt19937_64 rng(derive_seed(cfg.seed, patient_index));
  std::uniform_int_distribution<std::size_t> stay_dist(cfg.stay_hours_min, cfg.stay_hours_max);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const std::size_t m = stay_dist(rng);
  PatientSeries s;
  {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%06zu", patient_index);
    s.patient_id = buf;
  }
  s.rows.resize(m, schema.size());

  std::optional<std::size_t> onset;
  if (septic) {
    std::uniform_int_distribution<std::size_t> onset_dist(cfg.deterioration_lead, m - 1);
    onset = onset_dist(rng);
  }

  const double age = 35.0 + std::floor(unif(rng) * 56.0);
  const double gender = unif(rng) < 0.5 ? 0.0 : 1.0;

  const int i_bun = schema.index_of("BUN");
  const int i_cr = schema.index_of("Creatinine");
  const int i_sao2 = schema.index_of("SaO2");
  const int i_fio2 = schema.index_of("FiO2");
  const int i_buncr = schema.index_of("BUN_CR");
  const int i_s_f = schema.index_of("SaO2_FiO2");

  // AR(1) on the deviation from the (possibly ramping) target, so the value
  // tracks the deterioration ramp instead of lagging it.
  std::vector<double> dev(schema.size(), 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    double* row = s.rows[t];
    double ramp = 0.0;
    if (onset && t + cfg.deterioration_lead >= *onset) {
      const double into = static_cast<double>(t) - (static_cast<double>(*onset) - static_cast<double>(cfg.deterioration_lead));
      ramp = std::min(1.0, std::max(0.0, into / static_cast<double>(cfg.deterioration_lead)));
    }
    for (std::size_t j = 3; j < schema.size(); ++j) {
      const FeatureModel& fm = kModels[j];
      if (fm.noise_sd == 0.0) continue;  // derived columns below
      const double target = fm.mean + ramp * fm.drift;
      dev[j] = (t == 0) ? fm.noise_sd * 2.0 * gauss(rng)
                        : kAr1Phi * dev[j] + fm.noise_sd * gauss(rng);
      row[j] = clamp_floor(target + dev[j], 0.0);
    }
    row[0] = age;
    row[1] = gender;
    row[2] = static_cast<double>(t);
    row[i_buncr] = row[i_cr] > 1e-9 ? row[i_bun] / row[i_cr] : 0.0;
    row[i_s_f] = row[i_fio2] > 1e-9 ? row[i_sao2] / row[i_fio2] : 0.0;
  }

  // Deterioration must actually register on the score scale at onset.
  if (onset) {
    const int i_plt = schema.index_of("Platelets");
    const int i_bili = schema.index_of("TotalBilirubin");
    const int i_map = schema.index_of("MAP");
    double* row = s.rows[*onset];
    int sum = score_coagulation(row[i_plt]) + score_liver(row[i_bili]) +
              score_cardiovascular(row[i_map]) + score_renal(row[i_cr]);
    if (sum < 2) {
      row[i_plt] = std::min(row[i_plt], 95.0);
      row[i_bili] = std::max(row[i_bili], 2.1);
    }
  }

  // Mask after the trajectory is fixed; demographics stay observed.
  if (cfg.missing_rate > 0.0) {
    for (std::size_t t = 0; t < m; ++t) {
      double* row = s.rows[t];
      for (std::size_t j = 0; j < schema.size(); ++j) {
        if (schema.kinds[j] == FeatureKind::Demographic) continue;
        if (unif(rng) < cfg.missing_rate) row[j] = missing_value();
      }
    }
  }

  s.onset_hour = onset;
  return s;
}

Cohort generate_cohort(const GenConfig& cfg) {
  cfg.validate();
  const std::size_t n_septic =
      static_cast<std::size_t>(std::llround(cfg.sepsis_prevalence * static_cast<double>(cfg.n_patients)));
  std::vector<char> septic(cfg.n_patients, 0);
  std::fill(septic.begin(), septic.begin() + static_cast<std::ptrdiff_t>(std::min(n_septic, cfg.n_patients)), 1);
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x5ef71c));
  std::shuffle(septic.begin(), septic.end(), rng);

  Cohort c;
  c.schema = standard_schema();
  c.patients.reserve(cfg.n_patients);
  for (std::size_t i = 0; i < cfg.n_patients; ++i)
    c.patients.push_back(generate_patient(cfg, septic[i] != 0, i));
  c.feature_means = compute_feature_means(c.schema, c.patients);
  return c;
}

void write_psv(const Cohort& cohort, const std::string& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  for (const auto& p : cohort.patients) {
    const fs::path path = fs::path(directory) / (p.patient_id + ".psv");
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    for (std::size_t j = 0; j < cohort.schema.size(); ++j) {
      if (j) out << '|';
      out << cohort.schema.names[j];
    }
    out << "|SepsisLabel\n";
    char buf[40];
    for (std::size_t t = 0; t < p.hours(); ++t) {
      const double* row = p.rows[t];
      for (std::size_t j = 0; j < cohort.schema.size(); ++j) {
        if (j) out << '|';
        if (is_missing(row[j])) {
          out << "NaN";
        } else {
          std::snprintf(buf, sizeof buf, "%.17g", row[j]);
          out << buf;
        }
      }
      const int label = (p.onset_hour && t >= *p.onset_hour) ? 1 : 0;
      out << '|' << label << '\n';
    }
    if (!out) throw IoFailure("write failed for " + path.string());
  }
}

Cohort read_psv_dir(const std::string& directory) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory))
    if (entry.path().extension() == ".psv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoFailure("no .psv files under " + directory);

  Cohort c;
  c.schema = standard_schema();
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw IoFailure("cannot open " + f.string());
    std::stringstream ss;
    ss << in.rdbuf();
    c.patients.push_back(parse_psv(ss.str(), c.schema, f.stem().string()).series);
  }
  c.feature_means = compute_feature_means(c.schema, c.patients);
  return c;
}

}  // namespace sofanet
