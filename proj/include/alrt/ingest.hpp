#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "alrt/patient.hpp"
#include "alrt/schema.hpp"

namespace alrt {

/// Parses one pipe-separated patient file. The first line must be a header
/// matching the schema column names exactly; data lines hold numeric fields
/// where missing values are the literal token `NaN`.
PatientRecord parse_patient_file(std::istream& in, const std::string& patient_id,
                                 const RawColumnSchema& schema);

/// Renders a record back to the pipe format (header + one line per hour).
/// Values use shortest round-trip formatting, so parse(serialize(r)) == r.
std::string serialize_patient(const PatientRecord& record,
                              const RawColumnSchema& schema);

struct CohortStats {
  std::size_t files_seen = 0;
  std::size_t retained = 0;
  std::size_t dropped_short = 0;  // fewer than min_hours rows
  std::size_t septic = 0;
};

struct Cohort {
  RawColumnSchema schema;
  std::vector<PatientRecord> patients;  // sorted by patient_id
  CohortStats stats;
};

inline constexpr std::size_t kMinCohortHours = 24;

/// Loads every .psv file under `dir`, drops patients with fewer than
/// `min_hours` rows, and returns the rest sorted by patient_id. The schema
/// comes from the first file's header; all files must share it. Files are
/// parsed in parallel; the result does not depend on enumeration order.
Cohort load_cohort(const std::filesystem::path& dir,
                   std::size_t min_hours = kMinCohortHours,
                   unsigned threads = 0);

/// Normalized cohort dump: one JSON object per line with id, rows (arrays
/// with nulls for missing), and labels. Readable back via read_cohort_jsonl.
void write_cohort_jsonl(const Cohort& cohort, const std::filesystem::path& file);
Cohort read_cohort_jsonl(const std::filesystem::path& file);

}  // namespace alrt
