#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "alrt/active_loop.hpp"

namespace alrt {

/// Flat key=value experiment description. Every output embeds it, so a run is
/// reproducible from its artifacts alone.
struct Manifest {
  std::string dataset;
  std::string output;
  std::uint64_t seed = 7;
  std::vector<SamplingMethod> methods = {SamplingMethod::kNormLeastConfident,
                                         SamplingMethod::kNormMargin,
                                         SamplingMethod::kNormEntropy};
  double initial_fraction = 0.2;
  double increment = 0.2;
  int rounds = 5;
  std::size_t hidden_dim = 32;
  double learning_rate = 0.05;
  std::optional<double> gradient_clip = 5.0;
  double threshold = 0.5;
  std::string eval_mode = "timestep";  // or "patient"
  int vital_ffill = 12;
  int lab_ffill = 36;
  std::size_t min_hours = 24;
  unsigned threads = 0;

  void validate() const;
  ExperimentConfig experiment_config() const;  // method = methods.front()
  ImputationPolicy imputation_policy() const;
};

/// Lines of `key = value`; '#' starts a comment; unknown keys are errors.
Manifest parse_manifest_text(const std::string& text, const std::string& origin);
Manifest parse_manifest_file(const std::filesystem::path& file);

/// Canonical serialized form (stable key order).
std::string manifest_text(const Manifest& manifest);

/// One rendered table row, detached from the run so reports can be re-rendered
/// from their JSON without recomputing anything.
struct ReportRow {
  std::string label;
  bool is_baseline = false;
  std::string method;  // sampling method name; "baseline" for the RNN row
  double fraction = 1.0;
  MetricSummary timestep;
  MetricSummary patient;
  double mean_loss = 0.0;
};

std::vector<ReportRow> report_rows(const CrossValidationResult& result);

/// Model,Specificity,Sensitivity,Precision,Accuracy,AUROC,AUPRC
void write_metrics_csv(const std::vector<ReportRow>& rows, const std::string& eval_mode,
                       const std::filesystem::path& file);

/// model,method,fraction,auroc,auprc,mean_loss — one row per snapshot level.
void write_curves_csv(const std::vector<ReportRow>& rows, const std::string& eval_mode,
                      const std::filesystem::path& file);

/// method,round,patient_id,score for every transfer of one fold's runs.
void write_transfers_csv(const FoldRun& fold, const std::filesystem::path& file);

/// Full machine-readable record: manifest echo, fold composition, per-fold and
/// averaged metrics in both evaluation modes.
void write_report_json(const Manifest& manifest, const CrossValidationResult& result,
                       const std::filesystem::path& file);

/// Re-render metrics.csv and curves.csv from a report.json, byte-identically
/// to what the original run wrote.
void render_report(const std::filesystem::path& report_json,
                   const std::filesystem::path& out_dir);

/// Fixed-width text rendering of the metrics table for terminal output.
std::string metrics_table(const std::vector<ReportRow>& rows,
                          const std::string& eval_mode);

}  // namespace alrt
