#include "alrt/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace alrt {

LabOrderCounts engineer_lab_counts(const PatientRecord& record,
                                   const RawColumnSchema& schema) {
  const std::size_t t_count = record.rows.size();
  // labs_at[t] = non-missing lab cells observed at hour t
  std::vector<int> labs_at(t_count, 0);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (auto col : schema.lab_indices)
      if (record.rows[t].values[col].has_value()) ++labs_at[t];
  }
  // prefix[t] = labs in hours [0, t)
  std::vector<long long> prefix(t_count + 1, 0);
  for (std::size_t t = 0; t < t_count; ++t) prefix[t + 1] = prefix[t] + labs_at[t];

  auto window_sum = [&](std::size_t t, int width) {
    const std::size_t lo = t + 1 >= static_cast<std::size_t>(width)
                               ? t + 1 - static_cast<std::size_t>(width)
                               : 0;
    return static_cast<int>(prefix[t + 1] - prefix[lo]);
  };

  LabOrderCounts counts;
  counts.window12.resize(t_count);
  counts.window48.resize(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    counts.window12[t] = window_sum(t, 12);
    counts.window48[t] = window_sum(t, 48);
  }
  return counts;
}

std::vector<double> compute_column_medians(
    const std::vector<const PatientRecord*>& training, const RawColumnSchema& schema) {
  std::vector<std::size_t> columns;
  columns.reserve(kRawFeatureCount);
  for (auto i : schema.vital_indices) columns.push_back(i);
  for (auto i : schema.lab_indices) columns.push_back(i);

  std::vector<double> medians(columns.size(), 0.0);
  std::vector<double> values;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    values.clear();
    for (const PatientRecord* patient : training)
      for (const auto& row : patient->rows)
        if (row.values[columns[j]].has_value())
          values.push_back(*row.values[columns[j]]);
    if (values.empty()) continue;  // never observed: fall back to 0
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    medians[j] = (n % 2 == 1) ? values[n / 2]
                              : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  }
  return medians;
}

std::vector<double> compute_column_medians(const std::vector<PatientRecord>& training,
                                           const RawColumnSchema& schema) {
  std::vector<const PatientRecord*> pointers;
  pointers.reserve(training.size());
  for (const auto& patient : training) pointers.push_back(&patient);
  return compute_column_medians(pointers, schema);
}

Matrix impute(const PatientRecord& record, const RawColumnSchema& schema,
              const ImputationPolicy& policy, const std::vector<double>& medians) {
  policy.validate();
  if (medians.size() != kRawFeatureCount)
    throw ConfigError("impute: expected " + std::to_string(kRawFeatureCount) +
                      " medians, got " + std::to_string(medians.size()));
  if (record.rows.empty()) throw ConfigError("impute: record has no rows");

  std::vector<std::size_t> columns;
  std::vector<int> horizons;
  columns.reserve(kRawFeatureCount);
  horizons.reserve(kRawFeatureCount);
  for (auto i : schema.vital_indices) {
    columns.push_back(i);
    horizons.push_back(policy.vital_ffill_horizon);
  }
  for (auto i : schema.lab_indices) {
    columns.push_back(i);
    horizons.push_back(policy.lab_ffill_horizon);
  }

  const std::size_t t_count = record.rows.size();
  Matrix out(t_count, kRawFeatureCount);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const std::size_t col = columns[j];
    const int horizon = horizons[j];
    long long last_seen = -1;
    double last_value = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
      const auto& cell = record.rows[t].values[col];
      if (cell.has_value()) {
        last_seen = static_cast<long long>(t);
        last_value = *cell;
        out(t, j) = *cell;
      } else if (last_seen >= 0 &&
                 static_cast<long long>(t) - last_seen <= horizon) {
        out(t, j) = last_value;
      } else {
        out(t, j) = medians[j];
      }
    }
  }
  return out;
}

FeatureSequence build_features(const PatientRecord& record,
                               const RawColumnSchema& schema,
                               const ImputationPolicy& policy,
                               const std::vector<double>& medians) {
  const LabOrderCounts counts = engineer_lab_counts(record, schema);
  const Matrix raw = impute(record, schema, policy, medians);

  FeatureSequence seq;
  seq.patient_id = record.patient_id;
  seq.labels = record.labels;
  seq.matrix = Matrix(raw.rows, kFeatureCount);
  for (std::size_t t = 0; t < raw.rows; ++t) {
    for (std::size_t j = 0; j < kRawFeatureCount; ++j) seq.matrix(t, j) = raw(t, j);
    seq.matrix(t, kRawFeatureCount) = counts.window12[t];
    seq.matrix(t, kRawFeatureCount + 1) = counts.window48[t];
  }
  return seq;
}

ScalerParams fit_scaler(const std::vector<const Matrix*>& training) {
  if (training.empty()) throw ConfigError("fit_scaler: no training matrices");
  const std::size_t cols = training.front()->cols;
  std::vector<double> sum(cols, 0.0), sum_sq(cols, 0.0);
  std::size_t rows = 0;
  for (const Matrix* m : training) {
    if (m->cols != cols) throw ConfigError("fit_scaler: inconsistent column counts");
    for (std::size_t t = 0; t < m->rows; ++t) {
      const double* row = m->row(t);
      for (std::size_t j = 0; j < cols; ++j) {
        sum[j] += row[j];
        sum_sq[j] += row[j] * row[j];
      }
    }
    rows += m->rows;
  }
  if (rows == 0) throw ConfigError("fit_scaler: no rows");

  ScalerParams params;
  params.mean.resize(cols);
  params.scale.resize(cols);
  const double n = static_cast<double>(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    const double mean = sum[j] / n;
    const double var = std::max(0.0, sum_sq[j] / n - mean * mean);
    const double sd = std::sqrt(var);
    params.mean[j] = mean;
    params.scale[j] = sd > 0.0 ? sd : 1.0;  // degenerate columns clamp to 1
  }
  return params;
}

ScalerParams fit_scaler(const std::vector<FeatureSequence>& training) {
  std::vector<const Matrix*> matrices;
  matrices.reserve(training.size());
  for (const auto& seq : training) matrices.push_back(&seq.matrix);
  return fit_scaler(matrices);
}

void apply_scaler_inplace(Matrix& matrix, const ScalerParams& params) {
  if (matrix.cols != params.mean.size() || matrix.cols != params.scale.size())
    throw ConfigError("apply_scaler: dimension mismatch");
  for (std::size_t t = 0; t < matrix.rows; ++t) {
    double* row = matrix.row(t);
    for (std::size_t j = 0; j < matrix.cols; ++j)
      row[j] = (row[j] - params.mean[j]) / params.scale[j];
  }
}

Matrix apply_scaler(const Matrix& matrix, const ScalerParams& params) {
  Matrix out = matrix;
  apply_scaler_inplace(out, params);
  return out;
}

ClassWeights compute_class_weights(std::size_t n_negative, std::size_t n_positive) {
  if (n_negative == 0 || n_positive == 0)
    throw ConfigError("class weights undefined: one class is absent");
  const double total = static_cast<double>(n_negative + n_positive);
  ClassWeights w;
  w.weight_negative = total / (2.0 * static_cast<double>(n_negative));
  w.weight_positive = total / (2.0 * static_cast<double>(n_positive));
  return w;
}

ClassWeights compute_class_weights(const std::vector<int>& labels) {
  std::size_t pos = 0;
  for (int label : labels) pos += label != 0;
  return compute_class_weights(labels.size() - pos, pos);
}

PreprocessParams fit_preprocess(const std::vector<const PatientRecord*>& training,
                                const RawColumnSchema& schema,
                                const ImputationPolicy& policy) {
  if (training.empty()) throw ConfigError("fit_preprocess: empty training split");
  PreprocessParams params;
  params.medians = compute_column_medians(training, schema);

  std::vector<FeatureSequence> sequences;
  sequences.resize(training.size());
  parallel_for(training.size(), [&](std::size_t i) {
    sequences[i] = build_features(*training[i], schema, policy, params.medians);
  });
  params.scaler = fit_scaler(sequences);

  std::size_t pos = 0, total = 0;
  for (const PatientRecord* patient : training) {
    for (int label : patient->labels) pos += label != 0;
    total += patient->labels.size();
  }
  params.weights = compute_class_weights(total - pos, pos);
  return params;
}

PreprocessParams fit_preprocess(const std::vector<PatientRecord>& training,
                                const RawColumnSchema& schema,
                                const ImputationPolicy& policy) {
  std::vector<const PatientRecord*> pointers;
  pointers.reserve(training.size());
  for (const auto& patient : training) pointers.push_back(&patient);
  return fit_preprocess(pointers, schema, policy);
}

std::vector<FeatureSequence> apply_preprocess(
    const std::vector<const PatientRecord*>& records, const RawColumnSchema& schema,
    const ImputationPolicy& policy, const PreprocessParams& params,
    unsigned threads) {
  std::vector<FeatureSequence> out(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    out[i] = build_features(*records[i], schema, policy, params.medians);
    apply_scaler_inplace(out[i].matrix, params.scaler);
  }, threads);
  return out;
}

std::vector<FeatureSequence> apply_preprocess(
    const std::vector<PatientRecord>& records, const RawColumnSchema& schema,
    const ImputationPolicy& policy, const PreprocessParams& params,
    unsigned threads) {
  std::vector<const PatientRecord*> pointers;
  pointers.reserve(records.size());
  for (const auto& record : records) pointers.push_back(&record);
  return apply_preprocess(pointers, schema, policy, params, threads);
}

void save_preprocess_json(const PreprocessParams& params,
                          const RawColumnSchema& schema,
                          const std::filesystem::path& file) {
  const auto features = schema.feature_names();
  if (params.scaler.mean.size() != features.size())
    throw ConfigError("save_preprocess_json: scaler size mismatch");
  nlohmann::ordered_json obj;
  nlohmann::ordered_json cols;
  for (std::size_t j = 0; j < features.size(); ++j) {
    nlohmann::ordered_json entry;
    entry["mean"] = params.scaler.mean[j];
    entry["scale"] = params.scaler.scale[j];
    if (j < params.medians.size()) entry["median"] = params.medians[j];
    cols[features[j]] = std::move(entry);
  }
  obj["columns"] = std::move(cols);
  obj["weight_negative"] = params.weights.weight_negative;
  obj["weight_positive"] = params.weights.weight_positive;
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << obj.dump(2) << '\n';
}

PreprocessParams load_preprocess_json(const RawColumnSchema& schema,
                                      const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
  PreprocessParams params;
  const auto features = schema.feature_names();
  const auto& cols = obj.at("columns");
  params.scaler.mean.resize(features.size());
  params.scaler.scale.resize(features.size());
  params.medians.resize(kRawFeatureCount);
  for (std::size_t j = 0; j < features.size(); ++j) {
    const auto& entry = cols.at(features[j]);
    params.scaler.mean[j] = entry.at("mean").get<double>();
    params.scaler.scale[j] = entry.at("scale").get<double>();
    if (j < kRawFeatureCount) params.medians[j] = entry.at("median").get<double>();
  }
  params.weights.weight_negative = obj.at("weight_negative").get<double>();
  params.weights.weight_positive = obj.at("weight_positive").get<double>();
  return params;
}

}  // namespace alrt
