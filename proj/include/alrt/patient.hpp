#pragma once

#include <optional>
#include <string>
#include <vector>

namespace alrt {

/// One hourly observation row. Has exactly one (possibly missing) slot per
/// schema column, label column included.
struct RawRow {
  std::vector<std::optional<double>> values;
};

/// One patient's hourly observations plus the per-hour sepsis labels split
/// out of the label column. Immutable after construction by convention.
struct PatientRecord {
  std::string patient_id;
  std::vector<RawRow> rows;   // index = hours since ICU admission
  std::vector<int> labels;    // 0/1, same length as rows
};

/// Patient-level sepsis flag: any positive hour.
inline bool is_septic(const PatientRecord& record) {
  for (int label : record.labels)
    if (label != 0) return true;
  return false;
}

}  // namespace alrt
