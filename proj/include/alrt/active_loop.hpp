#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "alrt/core.hpp"
#include "alrt/metrics.hpp"
#include "alrt/model.hpp"
#include "alrt/patient.hpp"
#include "alrt/preprocess.hpp"
#include "alrt/sampling.hpp"
#include "alrt/schema.hpp"

namespace alrt {

struct Transfer {
  std::string patient_id;
  double score = 0.0;
};

/// The evolving labeled/unlabeled partition of one training run. Both id
/// vectors stay sorted; history[r] holds the patients moved after round r+1.
struct PoolState {
  std::vector<std::string> labeled;
  std::vector<std::string> unlabeled;
  int round = 0;
  std::vector<std::vector<Transfer>> history;
};

struct FoldPlan {
  std::map<std::string, int> fold_assignments;
  std::uint64_t seed = 0;
  int n_folds = 5;

  /// Patient ids of one fold, sorted.
  std::vector<std::string> fold_ids(int fold) const;
};

/// Stratified patient-level fold assignment: per class, a seeded shuffle is
/// dealt round-robin, so fold sizes differ by at most one within each class.
FoldPlan make_folds(const std::vector<PatientRecord>& cohort, std::uint64_t seed,
                    int n_folds = 5);

/// Stratified random seed of the labeled pool: ceil(fraction * N) patients,
/// class quotas by largest remainder.
PoolState seed_pool(const std::vector<std::string>& training_ids,
                    const std::vector<int>& septic_flags, double fraction,
                    std::uint64_t seed);

/// ceil(fraction * n) with a guard against the product landing a hair above
/// an exact integer, clamped to [0, n].
std::size_t schedule_target(double fraction, std::size_t n);

struct ExperimentConfig {
  SamplingMethod method = SamplingMethod::kNormEntropy;
  double initial_fraction = 0.2;
  double increment = 0.2;
  int rounds = 5;
  std::size_t hidden_dim = 32;
  TrainConfig train;  // epochs is ignored: each round trains exactly one epoch
  std::uint64_t seed = 0;
  bool reinit_each_round = false;
  double threshold = 0.5;
  unsigned threads = 0;

  void validate() const;
};

/// One active-learning round: the model trained so far, what it was trained
/// on, and which patients its uncertainty pulled in afterwards.
struct RoundRecord {
  int round = 0;              // 1-based
  double trained_fraction = 0.0;
  std::size_t labeled_count = 0;
  double epoch_mean_loss = 0.0;
  ModelParams snapshot;
  std::vector<Transfer> transferred;
};

struct AlrtResult {
  ModelParams final_params;
  PoolState pool;
  std::vector<RoundRecord> rounds;
  std::vector<double> loss_trace;  // one entry per epoch across all rounds
};

/// The full protocol: seed the pool, then per round train one epoch on the
/// labeled set (warm start), snapshot, score the unlabeled pool with the
/// frozen snapshot, and transfer the most uncertain patients until the
/// labeled fraction reaches min(initial + round * increment, 1).
AlrtResult run_alrt(const std::vector<const FeatureSequence*>& training,
                    const ExperimentConfig& config);
AlrtResult run_alrt(const std::vector<FeatureSequence>& training,
                    const ExperimentConfig& config);

/// Full-data reference: identical to run_alrt with initial_fraction 1.0,
/// i.e. config.rounds epochs over the whole training set, same seeds.
AlrtResult run_baseline(const std::vector<const FeatureSequence*>& training,
                        const ExperimentConfig& config);
AlrtResult run_baseline(const std::vector<FeatureSequence>& training,
                        const ExperimentConfig& config);

/// Pooled-timestep and per-patient (max probability over hours) evaluation of
/// one model on a held-out fold, plus its mean test loss.
struct SnapshotEvaluation {
  EvalReport timestep;
  EvalReport patient;
  double mean_loss = 0.0;
};

SnapshotEvaluation evaluate_snapshot(const ModelParams& params,
                                     const std::vector<FeatureSequence>& test,
                                     const ClassWeights& weights,
                                     double threshold = 0.5, unsigned threads = 0);

/// Plain metric tuple used for fold averaging (counts do not average).
struct MetricSummary {
  double specificity = 0.0;
  double sensitivity = 0.0;
  double precision = 0.0;
  double accuracy = 0.0;
  double auroc = 0.0;
  double auprc = 0.0;
};

MetricSummary to_summary(const EvalReport& report);
MetricSummary mean_summary(const std::vector<MetricSummary>& summaries);

/// Row label like "RNN_40e" (fraction in percent, method suffix) or "RNN"
/// for the full-data baseline.
std::string row_label(SamplingMethod method, double fraction);
inline constexpr const char* kBaselineLabel = "RNN";

/// One report row: a (method, labeled-fraction) cell or the baseline,
/// with per-fold and fold-averaged metrics in both evaluation modes.
struct CvRow {
  std::string label;
  bool is_baseline = false;
  SamplingMethod method = SamplingMethod::kNormEntropy;
  double fraction = 1.0;
  std::vector<SnapshotEvaluation> folds;
  MetricSummary mean_timestep;
  MetricSummary mean_patient;
  double mean_loss = 0.0;
};

/// Everything one fold produced, retained for artifact export.
struct FoldRun {
  int fold = 0;
  std::uint64_t fold_seed = 0;
  PreprocessParams preprocess;
  std::vector<std::string> test_ids;
  std::vector<std::pair<SamplingMethod, AlrtResult>> method_runs;
  AlrtResult baseline;
};

struct CrossValidationResult {
  FoldPlan plan;
  std::vector<CvRow> rows;  // method-major blocks, fractions ascending, baseline last
  std::vector<FoldRun> folds;
};

/// 5-fold cross-validation of the protocol for each requested method plus the
/// shared full-data baseline. Per fold, medians/scaler/weights are fitted on
/// the four training folds only, and every method starts from the same seed
/// pool and initial weights so the comparison is paired.
CrossValidationResult run_cross_validation(const std::vector<PatientRecord>& cohort,
                                           const RawColumnSchema& schema,
                                           const ImputationPolicy& policy,
                                           const ExperimentConfig& config,
                                           const std::vector<SamplingMethod>& methods);

}  // namespace alrt
