#pragma once

#include <vector>

namespace sofanet {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // {0,1}
};

// Probability that a random positive outscores a random negative, ties
// credited 0.5 (rank / Mann-Whitney form). Needs both classes.
double auroc(const ScoredSet& s);

// Average precision: sum over positives, in descending score order with
// stable tie order by index, of precision-at-rank times 1/n_pos.
double auprc(const ScoredSet& s);

// Max over distinct score thresholds tau (predict positive iff score >= tau)
// of min(sensitivity, precision).
double min_se_pplus(const ScoredSet& s);

}  // namespace sofanet
