#include "alrt/schema.hpp"

#include <algorithm>
#include <array>
#include <string_view>

#include "alrt/core.hpp"

namespace alrt {

namespace {

constexpr std::array<std::string_view, kVitalCount> kVitalNames = {
    "HR", "O2Sat", "Temp", "SBP", "MAP", "DBP", "Resp", "EtCO2"};

constexpr std::array<std::string_view, kLabCount> kLabNames = {
    "BaseExcess", "HCO3",   "FiO2",       "pH",         "PaCO2",
    "SaO2",       "AST",    "BUN",        "Alkalinephos", "Calcium",
    "Chloride",   "Creatinine", "Bilirubin_direct", "Glucose", "Lactate",
    "Magnesium",  "Phosphate",  "Potassium", "Bilirubin_total", "TroponinI",
    "Hct",        "Hgb",    "PTT",        "WBC",        "Fibrinogen",
    "Platelets"};

constexpr std::array<std::string_view, kDemographicCount> kDemographicNames = {
    "Age", "Gender", "Unit1", "Unit2", "HospAdmTime", "ICULOS"};

constexpr std::string_view kLabelName = "SepsisLabel";

template <typename Names>
bool contains(const Names& names, std::string_view name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

void RawColumnSchema::validate() const {
  if (vital_indices.size() != kVitalCount)
    throw ConfigError("schema: expected 8 vital columns, got " +
                      std::to_string(vital_indices.size()));
  if (lab_indices.size() != kLabCount)
    throw ConfigError("schema: expected 26 lab columns, got " +
                      std::to_string(lab_indices.size()));
  if (demographic_indices.size() != kDemographicCount)
    throw ConfigError("schema: expected 6 demographic columns, got " +
                      std::to_string(demographic_indices.size()));
  std::vector<int> seen(names.size(), 0);
  auto mark = [&](std::size_t idx) {
    if (idx >= names.size())
      throw ConfigError("schema: column index out of range");
    ++seen[idx];
  };
  for (auto i : vital_indices) mark(i);
  for (auto i : lab_indices) mark(i);
  for (auto i : demographic_indices) mark(i);
  mark(label_index);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] != 1)
      throw ConfigError("schema: column '" + names[i] +
                        "' is not covered exactly once");
  }
}

RawColumnSchema RawColumnSchema::from_header(const std::vector<std::string>& header) {
  RawColumnSchema schema;
  schema.names = header;
  bool label_seen = false;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    if (contains(kVitalNames, name)) {
      schema.vital_indices.push_back(i);
    } else if (contains(kLabNames, name)) {
      schema.lab_indices.push_back(i);
    } else if (contains(kDemographicNames, name)) {
      schema.demographic_indices.push_back(i);
    } else if (name == kLabelName) {
      if (label_seen) throw ConfigError("schema: duplicate label column");
      schema.label_index = i;
      label_seen = true;
    } else {
      throw ConfigError("schema: unknown column '" + name + "'");
    }
  }
  if (!label_seen) throw ConfigError("schema: missing SepsisLabel column");
  schema.validate();
  return schema;
}

const RawColumnSchema& RawColumnSchema::physionet2019() {
  static const RawColumnSchema schema = [] {
    std::vector<std::string> names;
    names.reserve(kVitalCount + kLabCount + kDemographicCount + 1);
    for (auto n : kVitalNames) names.emplace_back(n);
    for (auto n : kLabNames) names.emplace_back(n);
    for (auto n : kDemographicNames) names.emplace_back(n);
    names.emplace_back(kLabelName);
    return from_header(names);
  }();
  return schema;
}

std::vector<std::string> RawColumnSchema::feature_names() const {
  std::vector<std::string> out;
  out.reserve(kFeatureCount);
  for (auto i : vital_indices) out.push_back(names[i]);
  for (auto i : lab_indices) out.push_back(names[i]);
  out.push_back(kLabCount12Name);
  out.push_back(kLabCount48Name);
  return out;
}

}  // namespace alrt
