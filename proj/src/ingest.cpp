#include "alrt/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "alrt/core.hpp"

namespace alrt {

namespace {

std::vector<std::string> split_pipe(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find('|', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_number(const std::string& token, const std::string& patient_id,
                    std::size_t line_no, std::size_t col_no,
                    const std::string& col_name) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, value);
  // from_chars accepts spellings like "nan" and "inf"; only finite values and
  // the exact missing token "NaN" (handled by the caller) are legal here.
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
    throw ParseError("patient " + patient_id + ": line " + std::to_string(line_no) +
                     ", column " + std::to_string(col_no) + " (" + col_name +
                     "): expected a number or NaN, got '" + token + "'");
  }
  return value;
}

}  // namespace

PatientRecord parse_patient_file(std::istream& in, const std::string& patient_id,
                                 const RawColumnSchema& schema) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("patient " + patient_id + ": empty file (missing header)");
  strip_cr(line);
  const auto header = split_pipe(line);
  if (header.size() != schema.column_count())
    throw ParseError("patient " + patient_id + ": header has " +
                     std::to_string(header.size()) + " columns, schema expects " +
                     std::to_string(schema.column_count()));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != schema.names[i])
      throw ParseError("patient " + patient_id + ": header column " +
                       std::to_string(i + 1) + " is '" + header[i] +
                       "', schema expects '" + schema.names[i] + "'");
  }

  PatientRecord record;
  record.patient_id = patient_id;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;  // tolerate a trailing blank line
    const auto tokens = split_pipe(line);
    if (tokens.size() != schema.column_count())
      throw ParseError("patient " + patient_id + ": line " + std::to_string(line_no) +
                       " has " + std::to_string(tokens.size()) + " fields, expected " +
                       std::to_string(schema.column_count()));
    RawRow row;
    row.values.resize(tokens.size());
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      if (tokens[c] == "NaN") continue;  // stays missing; token is case-sensitive
      row.values[c] = parse_number(tokens[c], patient_id, line_no, c + 1,
                                   schema.names[c]);
    }
    const auto& label_cell = row.values[schema.label_index];
    if (!label_cell.has_value() || (*label_cell != 0.0 && *label_cell != 1.0))
      throw ParseError("patient " + patient_id + ": line " + std::to_string(line_no) +
                       ": label must be 0 or 1");
    record.labels.push_back(static_cast<int>(*label_cell));
    record.rows.push_back(std::move(row));
  }
  if (record.rows.empty())
    throw ParseError("patient " + patient_id + ": no data rows");
  return record;
}

std::string serialize_patient(const PatientRecord& record,
                              const RawColumnSchema& schema) {
  std::string out;
  for (std::size_t i = 0; i < schema.names.size(); ++i) {
    if (i) out += '|';
    out += schema.names[i];
  }
  out += '\n';
  for (const auto& row : record.rows) {
    for (std::size_t c = 0; c < row.values.size(); ++c) {
      if (c) out += '|';
      out += row.values[c].has_value() ? format_double(*row.values[c]) : "NaN";
    }
    out += '\n';
  }
  return out;
}

Cohort load_cohort(const std::filesystem::path& dir, std::size_t min_hours,
                   unsigned threads) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::exists(dir))
    throw IoError("cohort directory does not exist: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".psv")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  Cohort cohort;
  cohort.stats.files_seen = files.size();
  if (files.empty()) {
    cohort.schema = RawColumnSchema::physionet2019();
    return cohort;
  }

  // Schema is data-driven: read the first header and classify its columns.
  {
    std::ifstream first(files.front());
    if (!first) throw IoError("cannot open " + files.front().string());
    std::string header_line;
    if (!std::getline(first, header_line))
      throw ParseError(files.front().string() + ": empty file (missing header)");
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    cohort.schema = RawColumnSchema::from_header(split_pipe(header_line));
  }

  std::vector<PatientRecord> parsed(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    std::ifstream in(files[i]);
    if (!in) throw IoError("cannot open " + files[i].string());
    try {
      parsed[i] = parse_patient_file(in, files[i].stem().string(), cohort.schema);
    } catch (const ParseError& e) {
      throw ParseError(files[i].string() + ": " + e.what());
    }
  }, threads);

  for (auto& record : parsed) {
    if (record.rows.size() < min_hours) {
      ++cohort.stats.dropped_short;
      continue;
    }
    if (is_septic(record)) ++cohort.stats.septic;
    ++cohort.stats.retained;
    cohort.patients.push_back(std::move(record));
  }
  std::sort(cohort.patients.begin(), cohort.patients.end(),
            [](const PatientRecord& a, const PatientRecord& b) {
              return a.patient_id < b.patient_id;
            });
  return cohort;
}

void write_cohort_jsonl(const Cohort& cohort, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  for (const auto& patient : cohort.patients) {
    nlohmann::ordered_json obj;
    obj["id"] = patient.patient_id;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : patient.rows) {
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& cell : row.values) {
        if (cell.has_value())
          cells.push_back(*cell);
        else
          cells.push_back(nullptr);
      }
      rows.push_back(std::move(cells));
    }
    obj["rows"] = std::move(rows);
    obj["labels"] = patient.labels;
    out << obj.dump() << '\n';
  }
}

Cohort read_cohort_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  Cohort cohort;
  cohort.schema = RawColumnSchema::physionet2019();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(file.string() + ": line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    PatientRecord patient;
    patient.patient_id = obj.at("id").get<std::string>();
    for (const auto& cells : obj.at("rows")) {
      RawRow row;
      row.values.reserve(cells.size());
      for (const auto& cell : cells) {
        if (cell.is_null())
          row.values.emplace_back(std::nullopt);
        else
          row.values.emplace_back(cell.get<double>());
      }
      patient.rows.push_back(std::move(row));
    }
    patient.labels = obj.at("labels").get<std::vector<int>>();
    if (patient.labels.size() != patient.rows.size())
      throw ParseError(file.string() + ": line " + std::to_string(line_no) +
                       ": rows/labels length mismatch");
    ++cohort.stats.retained;
    if (is_septic(patient)) ++cohort.stats.septic;
    cohort.patients.push_back(std::move(patient));
  }
  cohort.stats.files_seen = cohort.stats.retained;
  return cohort;
}

}  // namespace alrt
