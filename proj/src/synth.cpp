#include "alrt/synth.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "alrt/core.hpp"
#include "alrt/ingest.hpp"

namespace alrt {

namespace {

constexpr double kAr1Phi = 0.8;

// Rough clinical anchors for the 8 vitals; labs use a synthetic ladder.
constexpr std::array<double, kVitalCount> kVitalMean = {85.0, 97.0, 37.0, 120.0,
                                                        80.0, 65.0, 18.0, 33.0};
constexpr std::array<double, kVitalCount> kVitalNoiseSd = {8.0, 2.0, 0.5, 12.0,
                                                           8.0, 6.0, 3.0, 3.0};

double lab_mean(std::size_t lab_index) { return 20.0 + 3.0 * static_cast<double>(lab_index); }
double lab_noise_sd(std::size_t lab_index) {
  return 1.0 + 0.2 * static_cast<double>(lab_index);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

void SynthConfig::validate() const {
  if (n_patients == 0) throw ConfigError("synth: n_patients must be positive");
  if (min_hours < 24) throw ConfigError("synth: min_hours must be >= 24");
  if (max_hours < min_hours) throw ConfigError("synth: max_hours < min_hours");
  if (!(positive_rate > 0.0 && positive_rate < 1.0))
    throw ConfigError("synth: positive_rate must be in (0, 1)");
  if (vital_missingness < 0.0 || vital_missingness > 1.0 || lab_missingness < 0.0 ||
      lab_missingness > 1.0)
    throw ConfigError("synth: missingness must be in [0, 1]");
  if (signal_strength < 0.0) throw ConfigError("synth: signal_strength must be >= 0");
}

const std::vector<std::string>& synth_signal_columns() {
  static const std::vector<std::string> columns = {"HR",  "Temp",    "Resp",
                                                   "WBC", "Lactate", "BUN"};
  return columns;
}

std::vector<PatientRecord> generate_cohort(const SynthConfig& config) {
  config.validate();
  const RawColumnSchema& schema = RawColumnSchema::physionet2019();

  std::vector<bool> is_signal(schema.column_count(), false);
  for (const auto& name : synth_signal_columns()) {
    bool found = false;
    for (std::size_t c = 0; c < schema.names.size(); ++c) {
      if (schema.names[c] == name) {
        is_signal[c] = true;
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("synth: unknown signal column " + name);
  }

  // Per-column AR(1) parameters, indexed by raw column.
  std::vector<double> mean(schema.column_count(), 0.0);
  std::vector<double> noise_sd(schema.column_count(), 0.0);
  std::vector<double> miss_p(schema.column_count(), 0.0);
  for (std::size_t v = 0; v < schema.vital_indices.size(); ++v) {
    mean[schema.vital_indices[v]] = kVitalMean[v];
    noise_sd[schema.vital_indices[v]] = kVitalNoiseSd[v];
    miss_p[schema.vital_indices[v]] = config.vital_missingness;
  }
  for (std::size_t l = 0; l < schema.lab_indices.size(); ++l) {
    mean[schema.lab_indices[l]] = lab_mean(l);
    noise_sd[schema.lab_indices[l]] = lab_noise_sd(l);
    miss_p[schema.lab_indices[l]] = config.lab_missingness;
  }
  const double stationary_factor = 1.0 / std::sqrt(1.0 - kAr1Phi * kAr1Phi);

  // Patient id width grows with the cohort so lexicographic order is numeric.
  std::size_t width = 1;
  for (std::size_t n = config.n_patients; n >= 10; n /= 10) ++width;

  std::vector<PatientRecord> cohort(config.n_patients);
  parallel_for(config.n_patients, [&](std::size_t p) {
    Rng rng(derive_seed(config.seed, "patient", p));

    const int hours = config.min_hours +
                      static_cast<int>(rng.uniform_index(
                          static_cast<std::uint64_t>(config.max_hours - config.min_hours + 1)));
    const bool septic = rng.uniform() < config.positive_rate;
    // drawn for every patient so feature streams do not depend on the label
    const int onset =
        13 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hours - 13)));

    const double age = round2(40.0 + 40.0 * rng.uniform());
    const double gender = static_cast<double>(rng.uniform_index(2));
    const double unit1 = static_cast<double>(rng.uniform_index(2));
    const double hosp_adm = round2(-96.0 * rng.uniform());

    PatientRecord record;
    std::string id = std::to_string(p + 1);
    record.patient_id = "S" + std::string(width > id.size() ? width - id.size() : 0, '0') + id;
    record.rows.resize(static_cast<std::size_t>(hours));
    record.labels.resize(static_cast<std::size_t>(hours));
    for (int t = 0; t < hours; ++t) {
      record.rows[t].values.resize(schema.column_count());
      record.labels[t] = (septic && t >= onset) ? 1 : 0;
      record.rows[t].values[schema.label_index] = static_cast<double>(record.labels[t]);
    }

    // Demographics: constant per patient, fully observed; ICULOS counts hours.
    const std::array<double, kDemographicCount - 1> demo_values = {age, gender, unit1,
                                                                   1.0 - unit1, hosp_adm};
    for (int t = 0; t < hours; ++t) {
      for (std::size_t d = 0; d + 1 < schema.demographic_indices.size(); ++d)
        record.rows[t].values[schema.demographic_indices[d]] = demo_values[d];
      record.rows[t].values[schema.demographic_indices.back()] =
          static_cast<double>(t + 1);
    }

    // Signal columns: AR(1) latent, step drift from onset for septic patients,
    // then the missingness mask. Draw order is fixed per column.
    std::vector<std::size_t> signal_order;
    signal_order.reserve(kRawFeatureCount);
    for (auto c : schema.vital_indices) signal_order.push_back(c);
    for (auto c : schema.lab_indices) signal_order.push_back(c);

    std::vector<double> latent(static_cast<std::size_t>(hours));
    for (std::size_t c : signal_order) {
      const double stationary_sd = noise_sd[c] * stationary_factor;
      double x = mean[c] + stationary_sd * rng.normal();
      for (int t = 0; t < hours; ++t) {
        if (t > 0) x = mean[c] + kAr1Phi * (x - mean[c]) + noise_sd[c] * rng.normal();
        double value = x;
        if (septic && is_signal[c] && t >= onset)
          value += config.signal_strength * stationary_sd;
        latent[t] = round2(value);
      }
      for (int t = 0; t < hours; ++t) {
        const bool missing = rng.uniform() < miss_p[c];
        if (!missing) record.rows[t].values[c] = latent[t];
      }
    }
    cohort[p] = std::move(record);
  });
  return cohort;
}

void write_cohort_psv(const std::vector<PatientRecord>& cohort,
                      const RawColumnSchema& schema, const SynthConfig& config,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& patient : cohort) {
    const auto path = dir / (patient.patient_id + ".psv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << serialize_patient(patient, schema);
  }

  std::size_t septic = 0;
  for (const auto& patient : cohort) septic += is_septic(patient) ? 1 : 0;

  nlohmann::ordered_json manifest;
  manifest["n_patients"] = config.n_patients;
  manifest["seed"] = config.seed;
  manifest["min_hours"] = config.min_hours;
  manifest["max_hours"] = config.max_hours;
  manifest["positive_rate"] = config.positive_rate;
  manifest["vital_missingness"] = config.vital_missingness;
  manifest["lab_missingness"] = config.lab_missingness;
  manifest["signal_strength"] = config.signal_strength;
  manifest["signal_columns"] = synth_signal_columns();
  manifest["septic_patients"] = septic;
  const auto manifest_path = dir / "synth_manifest.json";
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + manifest_path.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace alrt
