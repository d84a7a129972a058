#include "sofanet/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "sofanet/errors.hpp"

namespace sofanet {

namespace {

void check(const ScoredSet& s) {
  if (s.scores.size() != s.labels.size()) throw LengthMismatch("scores and labels differ in length");
  if (s.scores.empty()) throw LengthMismatch("empty scored set");
}

std::size_t count_pos(const ScoredSet& s) {
  std::size_t n = 0;
  for (int l : s.labels) n += (l != 0);
  return n;
}

}  // namespace

double auroc(const ScoredSet& s) {
  check(s);
  const std::size_t n = s.scores.size();
  const std::size_t n_pos = count_pos(s);
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw SingleClass("AUROC needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.scores[a] < s.scores[b]; });

  // Rank sum of positives with average ranks over tie groups.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && s.scores[order[j]] == s.scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (s.labels[order[k]] != 0) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auprc(const ScoredSet& s) {
  check(s);
  const std::size_t n = s.scores.size();
  const std::size_t n_pos = count_pos(s);
  if (n_pos == 0) throw NoPositives("AUPRC needs at least one positive");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });

  double ap = 0.0;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (s.labels[order[k]] != 0) {
      ++tp;
      ap += static_cast<double>(tp) / static_cast<double>(k + 1);
    }
  }
  return ap / static_cast<double>(n_pos);
}

double min_se_pplus(const ScoredSet& s) {
  check(s);
  const std::size_t n = s.scores.size();
  const std::size_t n_pos = count_pos(s);
  if (n_pos == 0) throw NoPositives("Min(Se,P+) needs at least one positive");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });

  double best = 0.0;
  std::size_t tp = 0, predicted = 0;
  std::size_t i = 0;
  while (i < n) {
    // Whole tie group enters together: tau equals the group's score value.
    std::size_t j = i;
    while (j < n && s.scores[order[j]] == s.scores[order[i]]) {
      if (s.labels[order[j]] != 0) ++tp;
      ++predicted;
      ++j;
    }
    const double se = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double pp = static_cast<double>(tp) / static_cast<double>(predicted);
    best = std::max(best, std::min(se, pp));
    i = j;
  }
  return best;
}

}  // namespace sofanet
