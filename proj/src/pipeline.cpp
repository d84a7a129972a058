#include "sofanet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "sofanet/errors.hpp"
#include "sofanet/rng.hpp"

namespace sofanet {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  if (cell.empty() || cell == "NaN") return missing_value();
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw NonNumericCell("line " + std::to_string(line_no) + ": cell '" + cell + "' is not numeric");
  return v;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Cohort pick_patients(const Cohort& cohort, const std::vector<std::size_t>& which) {
  Cohort out;
  out.schema = cohort.schema;
  out.patients.reserve(which.size());
  for (std::size_t i : which) out.patients.push_back(cohort.patients[i]);
  out.feature_means = compute_feature_means(out.schema, out.patients);
  return out;
}

}  // namespace

ParseResult parse_psv(const std::string& text, const FeatureSchema& schema,
                      const std::string& patient_id) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw MalformedHeader("missing header line");

  const std::vector<std::string> header = split_fields(line, '|');
  std::vector<int> target(header.size(), -1);  // schema column, -2 for SepsisLabel
  ParseResult result;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw MalformedHeader("empty header column " + std::to_string(c));
    if (header[c] == "SepsisLabel") {
      target[c] = -2;
      continue;
    }
    const int idx = schema.index_of(header[c]);
    if (idx < 0)
      result.unknown_columns.push_back(header[c]);
    else
      target[c] = idx;
  }

  std::vector<std::vector<double>> data_rows;
  std::optional<std::size_t> onset;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_fields(line, '|');
    if (cells.size() != header.size())
      throw RowArity("line " + std::to_string(line_no) + ": " + std::to_string(cells.size()) +
                     " cells, header has " + std::to_string(header.size()));
    std::vector<double> row(schema.size(), missing_value());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], line_no);
      if (target[c] == -2) {
        if (!is_missing(v) && v != 0.0 && !onset) onset = data_rows.size();
      } else if (target[c] >= 0) {
        row[static_cast<std::size_t>(target[c])] = v;
      }
    }
    data_rows.push_back(std::move(row));
  }

  PatientSeries& s = result.series;
  s.patient_id = patient_id;
  s.rows.resize(data_rows.size(), schema.size());
  for (std::size_t i = 0; i < data_rows.size(); ++i)
    std::copy(data_rows[i].begin(), data_rows[i].end(), s.rows[i]);
  s.onset_hour = onset;
  return result;
}

double missing_ratio(const FeatureSchema& schema, const PatientSeries& series) {
  std::size_t total = 0;
  std::size_t missing = 0;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema.kinds[j] == FeatureKind::Demographic) continue;
    for (std::size_t t = 0; t < series.hours(); ++t) {
      ++total;
      if (is_missing(series.rows[t][j])) ++missing;
    }
  }
  return total ? static_cast<double>(missing) / static_cast<double>(total) : 0.0;
}

std::vector<double> compute_feature_means(const FeatureSchema& schema,
                                          const std::vector<PatientSeries>& patients) {
  std::vector<double> sum(schema.size(), 0.0);
  std::vector<std::size_t> count(schema.size(), 0);
  for (const auto& p : patients) {
    for (std::size_t t = 0; t < p.hours(); ++t) {
      const double* row = p.rows[t];
      for (std::size_t j = 0; j < schema.size(); ++j) {
        if (!is_missing(row[j])) {
          sum[j] += row[j];
          ++count[j];
        }
      }
    }
  }
  std::vector<double> means(schema.size(), 0.0);
  for (std::size_t j = 0; j < schema.size(); ++j)
    means[j] = count[j] ? sum[j] / static_cast<double>(count[j]) : 0.0;
  return means;
}

Cohort screen_cohort(const Cohort& cohort, double max_missing) {
  Cohort out;
  out.schema = cohort.schema;
  for (const auto& p : cohort.patients)
    if (missing_ratio(cohort.schema, p) < max_missing) out.patients.push_back(p);
  if (out.patients.empty()) throw EmptyResult("no patient passes the missing-ratio screen");
  out.feature_means = compute_feature_means(out.schema, out.patients);
  return out;
}

PatientSeries impute(const PatientSeries& series, const std::vector<double>& feature_means) {
  if (feature_means.size() != series.rows.cols)
    throw LengthMismatch("impute: feature mean count differs from column count");
  PatientSeries out = series;
  for (std::size_t j = 0; j < out.rows.cols; ++j) {
    for (std::size_t t = 0; t < out.hours(); ++t) {
      double& cell = out.rows[t][j];
      if (is_missing(cell)) cell = (t == 0) ? feature_means[j] : out.rows[t - 1][j];
    }
  }
  return out;
}

Mat differential(const Mat& x) {
  Mat dx(x.rows, x.cols);
  for (std::size_t i = 1; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) dx[i][j] = x[i][j] - x[i - 1][j];
  return dx;
}

std::vector<WindowSample> make_windows(const PatientSeries& imputed,
                                       const std::vector<std::array<int, 4>>& sofa,
                                       std::size_t window, std::size_t horizon) {
  const std::size_t m = imputed.hours();
  if (m < window) throw SeriesTooShort("stay of " + std::to_string(m) + " hours, window " +
                                       std::to_string(window));
  if (sofa.size() != m) throw LengthMismatch("make_windows: one score tuple per hour required");

  std::vector<WindowSample> out;
  for (std::size_t k = 0; k + window <= m; ++k) {
    const std::size_t last = k + window - 1;
    // Keep only windows that end before onset; later ones would feed the
    // model hours at which sepsis is already present.
    if (imputed.onset_hour && last >= *imputed.onset_hour) break;

    WindowSample w;
    w.patient_id = imputed.patient_id;
    w.start_hour = k;
    w.x.resize(window, imputed.rows.cols);
    for (std::size_t i = 0; i < window; ++i)
      std::copy(imputed.rows[k + i], imputed.rows[k + i] + imputed.rows.cols, w.x[i]);
    w.dx = differential(w.x);
    w.sofa_labels = sofa[last];
    if (imputed.onset_hour) {
      const std::size_t onset = *imputed.onset_hour;
      w.sepsis_label = (onset >= k + window && onset <= k + window + horizon - 1) ? 1 : 0;
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::pair<Cohort, Cohort> split_patients(const Cohort& cohort, double test_frac, std::uint64_t seed) {
  const std::size_t n = cohort.size();
  if (n < 2) throw EmptyResult("split needs at least two patients");
  std::size_t n_test = static_cast<std::size_t>(std::llround(test_frac * static_cast<double>(n)));
  n_test = std::max<std::size_t>(1, std::min(n_test, n - 1));

  const std::vector<std::size_t> idx = shuffled_indices(n, seed);
  std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  return {pick_patients(cohort, train_idx), pick_patients(cohort, test_idx)};
}

Cohort subsample_patients(const Cohort& cohort, double frac, std::uint64_t seed) {
  if (!(frac > 0.0 && frac <= 1.0)) throw ConfigInvalid("subsample fraction must be in (0,1]");
  const std::size_t n = cohort.size();
  std::size_t take = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
  take = std::max<std::size_t>(1, std::min(take, n));
  const std::vector<std::size_t> idx = shuffled_indices(n, seed);
  std::vector<std::size_t> keep(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(keep.begin(), keep.end());
  return pick_patients(cohort, keep);
}

std::string cohort_manifest_json(const Cohort& cohort) {
  nlohmann::json j;
  j["schema_hash"] = cohort.schema.schema_hash();
  j["n_patients"] = cohort.size();
  nlohmann::json patients = nlohmann::json::array();
  for (const auto& p : cohort.patients) {
    nlohmann::json e;
    e["id"] = p.patient_id;
    e["hours"] = p.hours();
    if (p.onset_hour)
      e["onset_hour"] = *p.onset_hour;
    else
      e["onset_hour"] = nullptr;
    e["missing_ratio"] = missing_ratio(cohort.schema, p);
    patients.push_back(e);
  }
  j["patients"] = patients;
  return j.dump(2);
}

}  // namespace sofanet
