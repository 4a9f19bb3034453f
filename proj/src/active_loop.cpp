#include "alrt/active_loop.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>

namespace alrt {

std::vector<std::string> FoldPlan::fold_ids(int fold) const {
  std::vector<std::string> ids;
  for (const auto& [id, assigned] : fold_assignments)
    if (assigned == fold) ids.push_back(id);
  return ids;
}

FoldPlan make_folds(const std::vector<PatientRecord>& cohort, std::uint64_t seed,
                    int n_folds) {
  if (n_folds < 2) throw ConfigError("make_folds: need at least 2 folds");
  std::vector<std::string> by_class[2];
  for (const auto& record : cohort)
    by_class[is_septic(record) ? 1 : 0].push_back(record.patient_id);
  for (auto& ids : by_class) {
    std::sort(ids.begin(), ids.end());
    if (ids.size() < static_cast<std::size_t>(n_folds))
      throw ConfigError("make_folds: a class has fewer patients than folds (" +
                        std::to_string(ids.size()) + " < " +
                        std::to_string(n_folds) + ")");
  }

  FoldPlan plan;
  plan.seed = seed;
  plan.n_folds = n_folds;
  Rng rng(derive_seed(seed, "folds"));
  for (auto& ids : by_class) {
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!plan.fold_assignments.emplace(ids[i], static_cast<int>(i % n_folds)).second)
        throw ConfigError("make_folds: duplicate patient id " + ids[i]);
    }
  }
  return plan;
}

std::size_t schedule_target(double fraction, std::size_t n) {
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  if (raw <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(raw), n);
}

PoolState seed_pool(const std::vector<std::string>& training_ids,
                    const std::vector<int>& septic_flags, double fraction,
                    std::uint64_t seed) {
  if (training_ids.size() != septic_flags.size())
    throw ConfigError("seed_pool: ids/flags length mismatch");
  if (training_ids.empty()) throw ConfigError("seed_pool: empty training set");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("seed_pool: fraction must be in (0, 1]");

  const std::size_t n = training_ids.size();
  const std::size_t k = schedule_target(fraction, n);
  if (k == 0) throw ConfigError("seed_pool: fraction selects nobody");

  std::vector<std::string> by_class[2];
  for (std::size_t i = 0; i < n; ++i)
    by_class[septic_flags[i] != 0 ? 1 : 0].push_back(training_ids[i]);
  for (auto& ids : by_class) std::sort(ids.begin(), ids.end());

  // Largest-remainder class quotas for the k-patient sample.
  std::size_t quota[2];
  std::size_t rem[2];
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    quota[c] = k * by_class[c].size() / n;
    rem[c] = k * by_class[c].size() % n;
    assigned += quota[c];
  }
  for (std::size_t leftover = k - assigned; leftover > 0; --leftover) {
    const int c = rem[1] > rem[0] ? 1 : 0;
    ++quota[c];
    rem[c] = 0;
  }

  Rng rng(seed);
  PoolState pool;
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(by_class[c]);
    pool.labeled.insert(pool.labeled.end(), by_class[c].begin(),
                        by_class[c].begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(pool.labeled.begin(), pool.labeled.end());

  std::vector<std::string> all_sorted = training_ids;
  std::sort(all_sorted.begin(), all_sorted.end());
  std::set_difference(all_sorted.begin(), all_sorted.end(), pool.labeled.begin(),
                      pool.labeled.end(), std::back_inserter(pool.unlabeled));
  pool.round = 0;
  return pool;
}

void ExperimentConfig::validate() const {
  if (!(initial_fraction > 0.0 && initial_fraction <= 1.0))
    throw ConfigError("initial_fraction must be in (0, 1]");
  if (increment < 0.0) throw ConfigError("increment must be >= 0");
  if (rounds <= 0) throw ConfigError("rounds must be positive");
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("threshold must be in (0, 1)");
  if (initial_fraction + static_cast<double>(rounds) * increment < 1.0 - 1e-9)
    throw ConfigError("schedule never reaches the full training set");
  train.validate();
}

namespace {

double nominal_fraction(double initial, double increment, int steps) {
  const double raw = initial + static_cast<double>(steps) * increment;
  return std::min(1.0, std::round(raw * 1e6) / 1e6);
}

}  // namespace

AlrtResult run_alrt(const std::vector<const FeatureSequence*>& training,
                    const ExperimentConfig& config) {
  config.validate();
  if (training.empty()) throw ConfigError("run_alrt: empty training set");

  const std::size_t n = training.size();
  const std::size_t input_dim = training.front()->matrix.cols;
  std::map<std::string, const FeatureSequence*> by_id;
  for (const FeatureSequence* seq : training) {
    if (seq->matrix.cols != input_dim)
      throw ConfigError("run_alrt: inconsistent feature widths");
    if (!by_id.emplace(seq->patient_id, seq).second)
      throw ConfigError("run_alrt: duplicate patient id " + seq->patient_id);
  }
  std::vector<std::string> ids;
  std::vector<int> septic;
  ids.reserve(n);
  septic.reserve(n);
  for (const auto& [id, seq] : by_id) {
    ids.push_back(id);
    septic.push_back(is_septic(*seq) ? 1 : 0);
  }

  AlrtResult result;
  result.pool =
      seed_pool(ids, septic, config.initial_fraction, derive_seed(config.seed, "pool"));

  ModelParams params =
      init_params(config.hidden_dim, input_dim, derive_seed(config.seed, "init"));
  TrainConfig round_config = config.train;
  round_config.epochs = 1;
  round_config.rng_seed = derive_seed(config.seed, "train");

  for (int r = 1; r <= config.rounds; ++r) {
    if (config.reinit_each_round && r > 1)
      params = init_params(config.hidden_dim, input_dim,
                           derive_seed(config.seed, "init", static_cast<std::uint64_t>(r)));

    std::vector<const FeatureSequence*> labeled_seqs;
    labeled_seqs.reserve(result.pool.labeled.size());
    for (const auto& id : result.pool.labeled) labeled_seqs.push_back(by_id.at(id));

    TrainTrace trace;
    try {
      trace = train(params, labeled_seqs, round_config, /*epoch_offset=*/r - 1);
    } catch (const NumericError& err) {
      throw NumericError("round " + std::to_string(r) + ": " + err.what());
    }

    RoundRecord record;
    record.round = r;
    record.trained_fraction =
        nominal_fraction(config.initial_fraction, config.increment, r - 1);
    record.labeled_count = result.pool.labeled.size();
    record.epoch_mean_loss = trace.epoch_mean_loss.front();
    record.snapshot = params;
    result.loss_trace.insert(result.loss_trace.end(), trace.epoch_mean_loss.begin(),
                             trace.epoch_mean_loss.end());

    const double target_fraction =
        config.initial_fraction + static_cast<double>(r) * config.increment;
    const std::size_t target = schedule_target(target_fraction, n);
    std::size_t want =
        target > result.pool.labeled.size() ? target - result.pool.labeled.size() : 0;
    want = std::min(want, result.pool.unlabeled.size());
    if (r == config.rounds) want = result.pool.unlabeled.size();

    std::vector<Transfer> moved;
    if (want > 0) {
      const std::vector<std::string>& pool_ids = result.pool.unlabeled;
      std::vector<UncertaintyScore> scores(pool_ids.size());
      parallel_for(
          pool_ids.size(),
          [&](std::size_t i) {
            const FeatureSequence* seq = by_id.at(pool_ids[i]);
            scores[i] = UncertaintyScore{
                pool_ids[i], score_sequence(forward(params, seq->matrix), config.method),
                config.method};
          },
          config.threads);

      std::map<std::string, double> score_of;
      for (const auto& s : scores) score_of.emplace(s.patient_id, s.score);

      const std::vector<std::string> chosen = select_batch(scores, want);
      moved.reserve(chosen.size());
      for (const auto& id : chosen) moved.push_back(Transfer{id, score_of.at(id)});

      std::vector<std::string> chosen_sorted = chosen;
      std::sort(chosen_sorted.begin(), chosen_sorted.end());
      std::vector<std::string> new_labeled;
      new_labeled.reserve(result.pool.labeled.size() + chosen_sorted.size());
      std::merge(result.pool.labeled.begin(), result.pool.labeled.end(),
                 chosen_sorted.begin(), chosen_sorted.end(),
                 std::back_inserter(new_labeled));
      std::vector<std::string> new_unlabeled;
      new_unlabeled.reserve(result.pool.unlabeled.size() - chosen_sorted.size());
      std::set_difference(result.pool.unlabeled.begin(), result.pool.unlabeled.end(),
                          chosen_sorted.begin(), chosen_sorted.end(),
                          std::back_inserter(new_unlabeled));
      result.pool.labeled = std::move(new_labeled);
      result.pool.unlabeled = std::move(new_unlabeled);
    }
    result.pool.history.push_back(moved);
    result.pool.round = r;
    record.transferred = std::move(moved);
    result.rounds.push_back(std::move(record));
  }

  result.final_params = params;
  return result;
}

AlrtResult run_alrt(const std::vector<FeatureSequence>& training,
                    const ExperimentConfig& config) {
  std::vector<const FeatureSequence*> pointers;
  pointers.reserve(training.size());
  for (const auto& seq : training) pointers.push_back(&seq);
  return run_alrt(pointers, config);
}

AlrtResult run_baseline(const std::vector<const FeatureSequence*>& training,
                        const ExperimentConfig& config) {
  ExperimentConfig full = config;
  full.initial_fraction = 1.0;
  return run_alrt(training, full);
}

AlrtResult run_baseline(const std::vector<FeatureSequence>& training,
                        const ExperimentConfig& config) {
  std::vector<const FeatureSequence*> pointers;
  pointers.reserve(training.size());
  for (const auto& seq : training) pointers.push_back(&seq);
  return run_baseline(pointers, config);
}

SnapshotEvaluation evaluate_snapshot(const ModelParams& params,
                                     const std::vector<FeatureSequence>& test,
                                     const ClassWeights& weights, double threshold,
                                     unsigned threads) {
  if (test.empty()) throw ConfigError("evaluate_snapshot: empty test fold");

  std::vector<SequenceProbabilities> probs(test.size());
  parallel_for(
      test.size(), [&](std::size_t i) { probs[i] = forward(params, test[i].matrix); },
      threads);

  std::vector<double> pooled_probs;
  std::vector<int> pooled_labels;
  std::vector<double> patient_probs(test.size());
  std::vector<int> patient_labels(test.size());
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    loss_sum += sequence_loss(probs[i], test[i].labels, weights);
    patient_probs[i] = *std::max_element(probs[i].begin(), probs[i].end());
    patient_labels[i] = is_septic(test[i]) ? 1 : 0;
    pooled_probs.insert(pooled_probs.end(), probs[i].begin(), probs[i].end());
    pooled_labels.insert(pooled_labels.end(), test[i].labels.begin(),
                         test[i].labels.end());
  }

  SnapshotEvaluation out;
  out.timestep = evaluate(pooled_probs, pooled_labels, threshold);
  out.patient = evaluate(patient_probs, patient_labels, threshold);
  out.mean_loss = loss_sum / static_cast<double>(test.size());
  return out;
}

MetricSummary to_summary(const EvalReport& report) {
  return MetricSummary{report.specificity, report.sensitivity, report.precision,
                       report.accuracy,    report.auroc,       report.auprc};
}

MetricSummary mean_summary(const std::vector<MetricSummary>& summaries) {
  if (summaries.empty()) throw ConfigError("mean_summary: empty input");
  MetricSummary mean;
  for (const auto& s : summaries) {
    mean.specificity += s.specificity;
    mean.sensitivity += s.sensitivity;
    mean.precision += s.precision;
    mean.accuracy += s.accuracy;
    mean.auroc += s.auroc;
    mean.auprc += s.auprc;
  }
  const double n = static_cast<double>(summaries.size());
  mean.specificity /= n;
  mean.sensitivity /= n;
  mean.precision /= n;
  mean.accuracy /= n;
  mean.auroc /= n;
  mean.auprc /= n;
  return mean;
}

std::string row_label(SamplingMethod method, double fraction) {
  const long percent = std::lround(fraction * 100.0);
  return "RNN_" + std::to_string(percent) + std::string(method_suffix(method));
}

CrossValidationResult run_cross_validation(const std::vector<PatientRecord>& cohort,
                                           const RawColumnSchema& schema,
                                           const ImputationPolicy& policy,
                                           const ExperimentConfig& config,
                                           const std::vector<SamplingMethod>& methods) {
  config.validate();
  policy.validate();
  if (methods.empty()) throw ConfigError("run_cross_validation: no methods given");
  {
    std::set<std::string> suffixes;
    for (SamplingMethod method : methods)
      if (!suffixes.insert(std::string(method_suffix(method))).second)
        throw ConfigError("run_cross_validation: duplicate method suffix '" +
                          std::string(method_suffix(method)) + "'");
  }

  CrossValidationResult result;
  result.plan = make_folds(cohort, derive_seed(config.seed, "folds"));

  std::map<std::string, const PatientRecord*> by_id;
  for (const auto& record : cohort) by_id.emplace(record.patient_id, &record);

  const int n_folds = result.plan.n_folds;
  const std::size_t n_rounds = static_cast<std::size_t>(config.rounds);
  // evals[method][round][fold], baseline_evals[fold]
  std::vector<std::vector<std::vector<SnapshotEvaluation>>> evals(
      methods.size(), std::vector<std::vector<SnapshotEvaluation>>(n_rounds));
  std::vector<SnapshotEvaluation> baseline_evals;

  for (int fold = 0; fold < n_folds; ++fold) {
    std::vector<const PatientRecord*> train_records;
    std::vector<const PatientRecord*> test_records;
    for (const auto& [id, record] : by_id) {
      (result.plan.fold_assignments.at(id) == fold ? test_records : train_records)
          .push_back(record);
    }

    FoldRun run;
    run.fold = fold;
    run.fold_seed = derive_seed(config.seed, "fold", static_cast<std::uint64_t>(fold));
    run.test_ids = result.plan.fold_ids(fold);
    run.preprocess = fit_preprocess(train_records, schema, policy);
    const std::vector<FeatureSequence> train_seqs =
        apply_preprocess(train_records, schema, policy, run.preprocess, config.threads);
    const std::vector<FeatureSequence> test_seqs =
        apply_preprocess(test_records, schema, policy, run.preprocess, config.threads);

    ExperimentConfig fold_config = config;
    fold_config.seed = run.fold_seed;
    fold_config.train.class_weights = run.preprocess.weights;

    run.baseline = run_baseline(train_seqs, fold_config);
    baseline_evals.push_back(evaluate_snapshot(run.baseline.final_params, test_seqs,
                                               run.preprocess.weights, config.threshold,
                                               config.threads));

    for (std::size_t m = 0; m < methods.size(); ++m) {
      fold_config.method = methods[m];
      AlrtResult alrt = run_alrt(train_seqs, fold_config);
      for (std::size_t r = 0; r < n_rounds; ++r) {
        evals[m][r].push_back(evaluate_snapshot(alrt.rounds[r].snapshot, test_seqs,
                                                run.preprocess.weights, config.threshold,
                                                config.threads));
      }
      run.method_runs.emplace_back(methods[m], std::move(alrt));
    }
    result.folds.push_back(std::move(run));
  }

  auto finish_row = [&](CvRow& row, const std::vector<SnapshotEvaluation>& fold_evals) {
    row.folds = fold_evals;
    std::vector<MetricSummary> timestep, patient;
    double loss_sum = 0.0;
    for (const auto& eval : fold_evals) {
      timestep.push_back(to_summary(eval.timestep));
      patient.push_back(to_summary(eval.patient));
      loss_sum += eval.mean_loss;
    }
    row.mean_timestep = mean_summary(timestep);
    row.mean_patient = mean_summary(patient);
    row.mean_loss = loss_sum / static_cast<double>(fold_evals.size());
  };

  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t r = 0; r < n_rounds; ++r) {
      CvRow row;
      row.method = methods[m];
      row.fraction = result.folds.front().method_runs[m].second.rounds[r].trained_fraction;
      row.label = row_label(methods[m], row.fraction);
      finish_row(row, evals[m][r]);
      result.rows.push_back(std::move(row));
    }
  }
  CvRow baseline_row;
  baseline_row.label = kBaselineLabel;
  baseline_row.is_baseline = true;
  baseline_row.fraction = 1.0;
  finish_row(baseline_row, baseline_evals);
  result.rows.push_back(std::move(baseline_row));

  return result;
}

}  // namespace alrt
