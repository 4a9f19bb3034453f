#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alrt/core.hpp"
#include "alrt/patient.hpp"
#include "alrt/schema.hpp"

namespace alrt {

/// Bounded forward-fill horizons, in hours past the last observation.
struct ImputationPolicy {
  int vital_ffill_horizon = 12;
  int lab_ffill_horizon = 36;

  void validate() const {
    if (vital_ffill_horizon <= 0 || lab_ffill_horizon <= 0)
      throw ConfigError("imputation horizons must be positive");
  }
};

/// Per-feature standardization parameters over the 36-column feature matrix.
struct ScalerParams {
  std::vector<double> mean;   // length 36
  std::vector<double> scale;  // length 36, strictly positive
};

struct ClassWeights {
  double weight_negative = 1.0;
  double weight_positive = 1.0;
};

/// Model-ready sequence: T x 36 matrix with no missing cells.
struct FeatureSequence {
  std::string patient_id;
  Matrix matrix;
  std::vector<int> labels;
};

inline bool is_septic(const FeatureSequence& seq) {
  for (int label : seq.labels)
    if (label != 0) return true;
  return false;
}

struct LabOrderCounts {
  std::vector<int> window12;  // labs observed in hours (t-11 .. t), clipped at 0
  std::vector<int> window48;  // labs observed in hours (t-47 .. t), clipped at 0
};

/// Counts non-missing lab cells in sliding windows ending at each hour.
/// Computed on the raw record, before any imputation.
LabOrderCounts engineer_lab_counts(const PatientRecord& record,
                                   const RawColumnSchema& schema);

/// Per-column population medians of the observed vital/lab cells, pooled over
/// all timesteps of the given (training) patients. Column order: 8 vitals then
/// 26 labs. A column never observed anywhere gets median 0.
std::vector<double> compute_column_medians(
    const std::vector<const PatientRecord*>& training, const RawColumnSchema& schema);
std::vector<double> compute_column_medians(const std::vector<PatientRecord>& training,
                                           const RawColumnSchema& schema);

/// Bounded forward-fill plus median fallback over the 34 vital/lab columns.
/// Returns a fully observed T x 34 matrix.
Matrix impute(const PatientRecord& record, const RawColumnSchema& schema,
              const ImputationPolicy& policy, const std::vector<double>& medians);

/// Full per-patient transform: lab counts, imputation, assembly of the
/// T x 36 feature matrix (unscaled).
FeatureSequence build_features(const PatientRecord& record,
                               const RawColumnSchema& schema,
                               const ImputationPolicy& policy,
                               const std::vector<double>& medians);

/// Per-column mean and population standard deviation pooled over all
/// timesteps of all matrices. Zero-variance columns get scale 1.
ScalerParams fit_scaler(const std::vector<const Matrix*>& training);
ScalerParams fit_scaler(const std::vector<FeatureSequence>& training);

Matrix apply_scaler(const Matrix& matrix, const ScalerParams& params);
void apply_scaler_inplace(Matrix& matrix, const ScalerParams& params);

/// Balanced inverse-frequency weights over timestep labels:
/// w_c = N_total / (2 * N_c). Both classes must be present.
ClassWeights compute_class_weights(std::size_t n_negative, std::size_t n_positive);
ClassWeights compute_class_weights(const std::vector<int>& labels);

/// Everything fitted on a training split, reusable bit-exactly on any fold.
struct PreprocessParams {
  std::vector<double> medians;  // 34 raw columns
  ScalerParams scaler;          // 36 features
  ClassWeights weights;
};

PreprocessParams fit_preprocess(const std::vector<const PatientRecord*>& training,
                                const RawColumnSchema& schema,
                                const ImputationPolicy& policy);
PreprocessParams fit_preprocess(const std::vector<PatientRecord>& training,
                                const RawColumnSchema& schema,
                                const ImputationPolicy& policy);

std::vector<FeatureSequence> apply_preprocess(
    const std::vector<const PatientRecord*>& records, const RawColumnSchema& schema,
    const ImputationPolicy& policy, const PreprocessParams& params,
    unsigned threads = 0);
std::vector<FeatureSequence> apply_preprocess(
    const std::vector<PatientRecord>& records, const RawColumnSchema& schema,
    const ImputationPolicy& policy, const PreprocessParams& params,
    unsigned threads = 0);

/// JSON artifact mapping feature name -> mean/scale (and median for the 34
/// raw columns), so a fitted pipeline can be re-applied bit-exactly.
void save_preprocess_json(const PreprocessParams& params,
                          const RawColumnSchema& schema,
                          const std::filesystem::path& file);
PreprocessParams load_preprocess_json(const RawColumnSchema& schema,
                                      const std::filesystem::path& file);

}  // namespace alrt
