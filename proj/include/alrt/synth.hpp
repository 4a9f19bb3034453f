#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alrt/patient.hpp"
#include "alrt/schema.hpp"

namespace alrt {

/// Deterministic synthetic cohort: AR(1) latent signals with column-wise
/// missingness and, for septic patients, a step drift on six designated
/// columns from a drawn onset hour.
struct SynthConfig {
  std::size_t n_patients = 100;
  std::uint64_t seed = 0;
  int min_hours = 24;  // stays >= 24 so nothing is cohort-filtered
  int max_hours = 72;
  double positive_rate = 0.1;
  double vital_missingness = 0.3;
  double lab_missingness = 0.9;
  double signal_strength = 1.0;  // drift in units of each column's stationary sd

  void validate() const;
};

/// The columns a positive label drags along (vitals and labs with the
/// strongest class separation in real sepsis cohorts).
const std::vector<std::string>& synth_signal_columns();

std::vector<PatientRecord> generate_cohort(const SynthConfig& config);

/// One .psv per patient plus synth_manifest.json (config echo and the
/// ground-truth signal columns). Creates dir if needed.
void write_cohort_psv(const std::vector<PatientRecord>& cohort,
                      const RawColumnSchema& schema, const SynthConfig& config,
                      const std::filesystem::path& dir);

}  // namespace alrt
