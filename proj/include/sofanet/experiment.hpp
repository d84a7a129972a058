#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sofanet/collab.hpp"
#include "sofanet/metrics.hpp"
#include "sofanet/patient.hpp"

namespace sofanet {

// Impute with the given means (the training cohort's), score, window. Stays
// shorter than one window are skipped.
std::vector<WindowSample> build_windows(const Cohort& cohort, const std::vector<double>& impute_means,
                                        std::size_t window = 6, std::size_t horizon = 6);

ScoredSet score_sofanet(const std::vector<WindowSample>& windows, const Standardizer& st,
                        const ParamSet& params, const ModelConfig& cfg);

struct ArmMetrics {
  double auroc = 0.0;
  double auprc = 0.0;
  double min_sp = 0.0;
  std::size_t n = 0;
  std::size_t n_pos = 0;
};

ArmMetrics compute_metrics(const ScoredSet& s);

// One table row: an arm evaluated on both parties' test sets.
struct SuiteRow {
  std::string arm;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  ArmMetrics on_a;
  ArmMetrics on_b;
};

struct SuiteConfig {
  std::vector<double> fractions{0.01, 0.05, 0.10};
  std::size_t n_seeds = 5;
  std::uint64_t seed_base = 1;
  TrainConfig train;
  ModelConfig model;
  double test_frac = 0.1;
  std::uint64_t split_seed = 4242;
  double max_missing = 0.8;
  std::size_t workers = 2;
  std::string config_hash = "unhashed";
  std::string run_id = "suite";
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  std::string manifest_json;
};

// The full experiment grid: every (fraction, seed) trains the local arms
// (lr, nn, gru, sofanet_lc, sofanet_womc), finetune both directions and the
// collaborative arm on identical splits.
SuiteResult run_experiment_suite(const Cohort& cohort_a, const Cohort& cohort_b,
                                 const SuiteConfig& cfg);

std::string suite_rows_csv(const SuiteResult& r);
std::string suite_aggregate_csv(const SuiteResult& r);   // mean/std per arm x fraction
std::string suite_figure_csv(const SuiteResult& r);      // Min(Se,P+) vs fraction per arm

}  // namespace sofanet
