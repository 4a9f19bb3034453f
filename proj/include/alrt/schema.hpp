#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace alrt {

/// Column layout of a pipe-separated patient file. Columns are grouped into
/// vitals, laboratory values, demographics, and the single label column.
/// The schema is built from the file header so the column order always
/// follows the data, not this library.
struct RawColumnSchema {
  std::vector<std::string> names;                 // all columns, file order
  std::vector<std::size_t> vital_indices;         // 8 entries
  std::vector<std::size_t> lab_indices;           // 26 entries
  std::vector<std::size_t> demographic_indices;   // 6 entries
  std::size_t label_index = 0;

  std::size_t column_count() const { return names.size(); }

  /// Throws ConfigError if the index sets are not disjoint, do not cover
  /// every column, or have the wrong sizes (8 vitals / 26 labs / 6 demos).
  void validate() const;

  /// Classifies header columns by their 2019 PhysioNet Challenge names.
  /// Unknown column names are an error.
  static RawColumnSchema from_header(const std::vector<std::string>& header);

  /// The canonical challenge column set in its published order.
  static const RawColumnSchema& physionet2019();

  /// Names of the 36 model features: 8 vitals, 26 labs (schema order),
  /// then the two engineered lab-order counts.
  std::vector<std::string> feature_names() const;
};

inline constexpr std::size_t kVitalCount = 8;
inline constexpr std::size_t kLabCount = 26;
inline constexpr std::size_t kDemographicCount = 6;
inline constexpr std::size_t kRawFeatureCount = kVitalCount + kLabCount;  // 34
inline constexpr std::size_t kFeatureCount = kRawFeatureCount + 2;        // 36

inline constexpr const char* kLabCount12Name = "LabsOrdered12h";
inline constexpr const char* kLabCount48Name = "LabsOrdered48h";

}  // namespace alrt
