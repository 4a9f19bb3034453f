#pragma once

// Shared fixture builders for the test suites.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "alrt/core.hpp"
#include "alrt/patient.hpp"
#include "alrt/preprocess.hpp"
#include "alrt/schema.hpp"

namespace testutil {

inline const alrt::RawColumnSchema& schema() {
  return alrt::RawColumnSchema::physionet2019();
}

inline std::size_t column_index(const std::string& name) {
  const auto& names = schema().names;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw std::runtime_error("no column named " + name);
}

// All-missing record of the given length, labels all zero.
inline alrt::PatientRecord blank_record(std::string id, std::size_t hours) {
  alrt::PatientRecord rec;
  rec.patient_id = std::move(id);
  rec.rows.resize(hours);
  for (auto& row : rec.rows) row.values.resize(schema().column_count());
  rec.labels.assign(hours, 0);
  for (std::size_t t = 0; t < hours; ++t)
    rec.rows[t].values[schema().label_index] = 0.0;
  return rec;
}

inline void set_label(alrt::PatientRecord& rec, std::size_t t, int label) {
  rec.labels[t] = label;
  rec.rows[t].values[schema().label_index] = static_cast<double>(label);
}

// Random record with per-cell missingness; suits round-trip and impute tests.
inline alrt::PatientRecord random_record(std::string id, std::size_t hours,
                                         alrt::Rng& rng, double missing_rate = 0.5) {
  auto rec = blank_record(std::move(id), hours);
  const auto& sc = schema();
  for (std::size_t t = 0; t < hours; ++t) {
    for (std::size_t c = 0; c < sc.column_count(); ++c) {
      if (c == sc.label_index || rng.uniform() < missing_rate) continue;
      rec.rows[t].values[c] = std::round(rng.uniform(-50.0, 150.0) * 100.0) / 100.0;
    }
    if (rng.uniform() < 0.1) set_label(rec, t, 1);
  }
  return rec;
}

inline bool records_equal(const alrt::PatientRecord& a, const alrt::PatientRecord& b) {
  if (a.patient_id != b.patient_id || a.labels != b.labels ||
      a.rows.size() != b.rows.size())
    return false;
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    if (a.rows[t].values.size() != b.rows[t].values.size()) return false;
    for (std::size_t c = 0; c < a.rows[t].values.size(); ++c) {
      const auto& x = a.rows[t].values[c];
      const auto& y = b.rows[t].values[c];
      if (x.has_value() != y.has_value()) return false;
      if (x && *x != *y) return false;
    }
  }
  return true;
}

// Random feature sequences with a weak planted signal on feature 0 so
// training has something to find. Guarantees both patient classes.
inline std::vector<alrt::FeatureSequence> random_sequences(std::size_t n,
                                                           std::size_t hours,
                                                           std::uint64_t seed,
                                                           double positive_rate = 0.3) {
  alrt::Rng rng(seed);
  std::vector<alrt::FeatureSequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    alrt::FeatureSequence seq;
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%03zu", i);
    seq.patient_id = buf;
    seq.matrix = alrt::Matrix(hours, alrt::kFeatureCount);
    for (double& v : seq.matrix.data) v = rng.normal();
    seq.labels.assign(hours, 0);
    bool septic = rng.uniform() < positive_rate;
    if (i == 0) septic = true;
    if (i == 1) septic = false;
    if (septic) {
      std::size_t onset = rng.uniform_index(hours);
      for (std::size_t t = onset; t < hours; ++t) {
        seq.labels[t] = 1;
        seq.matrix(t, 0) += 2.0;
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

// Self-cleaning unique directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    auto prefix = tag + "-" + std::to_string(::getpid()) + "-";
    for (int i = 0; i < 10000; ++i) {
      std::error_code ec;
      auto candidate = base / (prefix + std::to_string(i));
      if (std::filesystem::create_directories(candidate, ec) && !ec) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir for " + tag);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Runs fn expecting it to throw E; returns e.what(), or "" if nothing thrown.
template <typename E, typename Fn>
std::string catch_message(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return {};
}

}  // namespace testutil
