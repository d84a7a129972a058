#include "sofanet/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "sofanet/baselines.hpp"
#include "sofanet/errors.hpp"
#include "sofanet/pipeline.hpp"
#include "sofanet/rng.hpp"
#include "sofanet/sofa.hpp"

namespace sofanet {

std::vector<WindowSample> build_windows(const Cohort& cohort, const std::vector<double>& impute_means,
                                        std::size_t window, std::size_t horizon) {
  std::vector<WindowSample> out;
  for (const auto& p : cohort.patients) {
    if (p.hours() < window) continue;
    const PatientSeries imputed = impute(p, impute_means);
    const auto scores = mandatory_scores(imputed, cohort.schema);
    auto ws = make_windows(imputed, scores, window, horizon);
    out.insert(out.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
  }
  return out;
}

ScoredSet score_sofanet(const std::vector<WindowSample>& windows, const Standardizer& st,
                        const ParamSet& params, const ModelConfig& cfg) {
  std::vector<std::size_t> all(windows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  ScoredSet s;
  s.scores = predict_proba(windows, all, st, params, cfg);
  s.labels.resize(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) s.labels[i] = windows[i].sepsis_label;
  return s;
}

ArmMetrics compute_metrics(const ScoredSet& s) {
  ArmMetrics m;
  m.n = s.scores.size();
  for (int l : s.labels) m.n_pos += (l != 0);
  m.auroc = auroc(s);
  m.auprc = auprc(s);
  m.min_sp = min_se_pplus(s);
  return m;
}

namespace {

struct PartyJobData {
  std::vector<WindowSample> train;
  std::vector<WindowSample> test;
};

ScoredSet score_flat(const std::vector<WindowSample>& windows, const Standardizer& st,
                     const ParamSet& params, bool is_lr) {
  std::vector<std::size_t> all(windows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const FlatDataset flat = flatten_windows(windows, all, st);
  ScoredSet s;
  s.scores = is_lr ? lr_predict(params, flat.x) : nn_predict(params, flat.x);
  s.labels = flat.labels;
  return s;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

SuiteResult run_experiment_suite(const Cohort& cohort_a, const Cohort& cohort_b,
                                 const SuiteConfig& cfg) {
  // Fixed test sets: split once per cohort, before any subsampling.
  const auto [pool_a, test_a] = split_patients(cohort_a, cfg.test_frac, cfg.split_seed);
  const auto [pool_b, test_b] = split_patients(cohort_b, cfg.test_frac, cfg.split_seed + 1);

  struct Job {
    double fraction;
    std::uint64_t seed;
    std::size_t slot;
  };
  std::vector<Job> jobs;
  for (double f : cfg.fractions)
    for (std::size_t i = 0; i < cfg.n_seeds; ++i)
      jobs.push_back({f, cfg.seed_base + i, jobs.size()});

  const std::vector<std::string> arm_names = {"lr",       "nn",      "gru",  "sofanet_lc",
                                              "sofanet_lc_womc", "finetune", "collab"};
  std::vector<std::vector<SuiteRow>> slots(jobs.size());

  auto run_job = [&](const Job& job) {
    TrainConfig tc = cfg.train;
    tc.seed = job.seed;

    const Cohort sub_a = subsample_patients(pool_a, job.fraction, derive_seed(job.seed, 0xa5a5u));
    const Cohort sub_b = subsample_patients(pool_b, job.fraction, derive_seed(job.seed, 0xb6b6u));

    PartyJobData da{build_windows(sub_a, sub_a.feature_means),
                    build_windows(test_a, sub_a.feature_means)};
    PartyJobData db{build_windows(sub_b, sub_b.feature_means),
                    build_windows(test_b, sub_b.feature_means)};

    const Standardizer st_a = fit_standardizer(da.train);
    const Standardizer st_b = fit_standardizer(db.train);

    std::vector<SuiteRow> rows;
    auto push_row = [&](const std::string& arm, const ScoredSet& on_a, const ScoredSet& on_b) {
      SuiteRow r;
      r.arm = arm;
      r.fraction = job.fraction;
      r.seed = job.seed;
      r.on_a = compute_metrics(on_a);
      r.on_b = compute_metrics(on_b);
      rows.push_back(r);
    };

    // flat baselines
    {
      const FlatDataset fa = flatten_windows(da.train, all_indices(da.train.size()), st_a);
      const FlatDataset fb = flatten_windows(db.train, all_indices(db.train.size()), st_b);
      const ParamSet lr_a = train_lr(fa, tc);
      const ParamSet lr_b = train_lr(fb, tc);
      push_row("lr", score_flat(da.test, st_a, lr_a, true), score_flat(db.test, st_b, lr_b, true));
      const ParamSet nn_a = train_nn(fa, cfg.model.hidden_dim, tc);
      const ParamSet nn_b = train_nn(fb, cfg.model.hidden_dim, tc);
      push_row("nn", score_flat(da.test, st_a, nn_a, false), score_flat(db.test, st_b, nn_b, false));
    }

    // recurrent local arms
    for (const char* arm : {"gru", "sofanet_lc", "sofanet_lc_womc"}) {
      ModelConfig mc = cfg.model;
      if (std::string(arm) == "gru") mc = gru_baseline_config(cfg.model);
      if (std::string(arm) == "sofanet_lc_womc") mc = sofanet_womc_config(cfg.model);
      const PartyResult ra = train_local(tc, mc, da.train);
      const PartyResult rb = train_local(tc, mc, db.train);
      push_row(arm, score_sofanet(da.test, ra.st, ra.params, mc),
               score_sofanet(db.test, rb.st, rb.params, mc));
    }

    // finetune both directions: the row's side is the target hospital
    {
      const PartyResult ab = finetune(tc, cfg.model, da.train, db.train);
      const PartyResult ba = finetune(tc, cfg.model, db.train, da.train);
      push_row("finetune", score_sofanet(da.test, ba.st, ba.params, cfg.model),
               score_sofanet(db.test, ab.st, ab.params, cfg.model));
    }

    // collaborative arm
    {
      const CollabResult cr = train_collab(tc, cfg.model, da.train, db.train);
      push_row("collab", score_sofanet(da.test, cr.a.st, cr.a.params, cfg.model),
               score_sofanet(db.test, cr.b.st, cr.b.params, cfg.model));
    }

    slots[job.slot] = std::move(rows);
  };

  // fixed-size worker pool over the job list
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        while (true) {
          const std::size_t j = next.fetch_add(1);
          if (j >= jobs.size()) break;
          run_job(jobs[j]);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SuiteResult result;
  for (auto& rows : slots)
    result.rows.insert(result.rows.end(), std::make_move_iterator(rows.begin()),
                       std::make_move_iterator(rows.end()));

  nlohmann::json manifest;
  manifest["run_id"] = cfg.run_id;
  manifest["config_hash"] = cfg.config_hash;
  manifest["fractions"] = cfg.fractions;
  manifest["n_seeds"] = cfg.n_seeds;
  manifest["seed_base"] = cfg.seed_base;
  manifest["split_seed"] = cfg.split_seed;
  manifest["test_frac"] = cfg.test_frac;
  manifest["rounds"] = cfg.train.rounds;
  manifest["hidden_dim"] = cfg.model.hidden_dim;
  manifest["arms"] = arm_names;
  manifest["tool_version"] = "1.0.0";
  result.manifest_json = manifest.dump(2);
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string suite_rows_csv(const SuiteResult& r) {
  std::string out =
      "arm,fraction,seed,auroc_a,auprc_a,min_sp_a,n_a,n_pos_a,auroc_b,auprc_b,min_sp_b,n_b,n_pos_b\n";
  for (const auto& row : r.rows) {
    out += row.arm + "," + fmt(row.fraction) + "," + std::to_string(row.seed) + "," +
           fmt(row.on_a.auroc) + "," + fmt(row.on_a.auprc) + "," + fmt(row.on_a.min_sp) + "," +
           std::to_string(row.on_a.n) + "," + std::to_string(row.on_a.n_pos) + "," +
           fmt(row.on_b.auroc) + "," + fmt(row.on_b.auprc) + "," + fmt(row.on_b.min_sp) + "," +
           std::to_string(row.on_b.n) + "," + std::to_string(row.on_b.n_pos) + "\n";
  }
  return out;
}

namespace {

struct Agg {
  std::vector<double> auroc_a, auprc_a, minsp_a, auroc_b, auprc_b, minsp_b;
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string suite_aggregate_csv(const SuiteResult& r) {
  std::map<std::pair<std::string, double>, Agg> groups;
  std::vector<std::pair<std::string, double>> order;
  for (const auto& row : r.rows) {
    const auto key = std::make_pair(row.arm, row.fraction);
    if (!groups.count(key)) order.push_back(key);
    Agg& g = groups[key];
    g.auroc_a.push_back(row.on_a.auroc);
    g.auprc_a.push_back(row.on_a.auprc);
    g.minsp_a.push_back(row.on_a.min_sp);
    g.auroc_b.push_back(row.on_b.auroc);
    g.auprc_b.push_back(row.on_b.auprc);
    g.minsp_b.push_back(row.on_b.min_sp);
  }
  std::string out =
      "arm,fraction,auroc_a_mean,auroc_a_std,auprc_a_mean,auprc_a_std,min_sp_a_mean,min_sp_a_std,"
      "auroc_b_mean,auroc_b_std,auprc_b_mean,auprc_b_std,min_sp_b_mean,min_sp_b_std\n";
  for (const auto& key : order) {
    const Agg& g = groups.at(key);
    out += key.first + "," + fmt(key.second) + "," + fmt(mean_of(g.auroc_a)) + "," +
           fmt(std_of(g.auroc_a)) + "," + fmt(mean_of(g.auprc_a)) + "," + fmt(std_of(g.auprc_a)) +
           "," + fmt(mean_of(g.minsp_a)) + "," + fmt(std_of(g.minsp_a)) + "," +
           fmt(mean_of(g.auroc_b)) + "," + fmt(std_of(g.auroc_b)) + "," + fmt(mean_of(g.auprc_b)) +
           "," + fmt(std_of(g.auprc_b)) + "," + fmt(mean_of(g.minsp_b)) + "," +
           fmt(std_of(g.minsp_b)) + "\n";
  }
  return out;
}

std::string suite_figure_csv(const SuiteResult& r) {
  std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::vector<std::pair<std::string, double>> order;
  for (const auto& row : r.rows) {
    const auto key = std::make_pair(row.arm, row.fraction);
    if (!groups.count(key)) order.push_back(key);
    groups[key].first.push_back(row.on_a.min_sp);
    groups[key].second.push_back(row.on_b.min_sp);
  }
  std::string out = "arm,fraction,min_sp_a_mean,min_sp_b_mean\n";
  for (const auto& key : order) {
    out += key.first + "," + fmt(key.second) + "," + fmt(mean_of(groups.at(key).first)) + "," +
           fmt(mean_of(groups.at(key).second)) + "\n";
  }
  return out;
}

}  // namespace sofanet
