#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "alrt/core.hpp"
#include "alrt/ingest.hpp"
#include "helpers.hpp"

using namespace alrt;
using namespace testutil;

namespace {

PatientRecord sepsis_fixture() {
  auto rec = blank_record("F001", 30);
  rec.rows[0].values[column_index("HR")] = 82.5;
  rec.rows[0].values[column_index("Temp")] = 36.9;
  rec.rows[3].values[column_index("Lactate")] = 1.8;
  rec.rows[12].values[column_index("WBC")] = 11.2;
  for (std::size_t t = 24; t < 30; ++t) set_label(rec, t, 1);
  return rec;
}

}  // namespace

TEST_CASE("physionet schema classifies the canonical 41 columns") {
  const auto& sc = schema();
  sc.validate();
  CHECK(sc.column_count() == 41);
  CHECK(sc.vital_indices.size() == kVitalCount);
  CHECK(sc.lab_indices.size() == kLabCount);
  CHECK(sc.demographic_indices.size() == kDemographicCount);
  CHECK(sc.names[sc.label_index] == "SepsisLabel");
  CHECK(sc.names[sc.vital_indices[0]] == "HR");

  auto features = sc.feature_names();
  REQUIRE(features.size() == kFeatureCount);
  CHECK(features[0] == "HR");
  CHECK(features[kVitalCount] == sc.names[sc.lab_indices[0]]);
  CHECK(features[34] == kLabCount12Name);
  CHECK(features[35] == kLabCount48Name);
}

TEST_CASE("from_header tolerates reordered columns but not unknown ones") {
  auto names = schema().names;
  std::swap(names[0], names[5]);
  auto sc = RawColumnSchema::from_header(names);
  sc.validate();
  CHECK(sc.names[0] == schema().names[5]);

  auto bad = schema().names;
  bad[2] = "HeartRate";
  auto msg = catch_message<ConfigError>([&] { RawColumnSchema::from_header(bad); });
  CHECK(msg.find("HeartRate") != std::string::npos);

  auto missing = schema().names;
  missing.pop_back();
  CHECK_THROWS_AS(RawColumnSchema::from_header(missing).validate(), std::exception);
}

TEST_CASE("parse reads the sepsis fixture exactly") {
  auto expected = sepsis_fixture();
  std::string text = serialize_patient(expected, schema());
  std::istringstream in(text);
  auto rec = parse_patient_file(in, "F001", schema());

  CHECK(rec.rows.size() == 30);
  CHECK(is_septic(rec));
  CHECK(rec.labels[23] == 0);
  CHECK(rec.labels[24] == 1);
  CHECK(*rec.rows[0].values[column_index("HR")] == 82.5);
  CHECK(*rec.rows[3].values[column_index("Lactate")] == 1.8);
  CHECK_FALSE(rec.rows[1].values[column_index("HR")].has_value());
  CHECK(records_equal(rec, expected));
}

TEST_CASE("serialize then parse is the identity on random records") {
  Rng rng(404);
  for (int i = 0; i < 50; ++i) {
    auto rec = random_record("R" + std::to_string(i), 5 + rng.uniform_index(40), rng);
    std::istringstream in(serialize_patient(rec, schema()));
    auto back = parse_patient_file(in, rec.patient_id, schema());
    REQUIRE(records_equal(rec, back));
  }
}

TEST_CASE("parse errors name the line and column") {
  auto rec = blank_record("B1", 3);
  std::string text = serialize_patient(rec, schema());

  SUBCASE("non-numeric field") {
    auto pos = text.find("NaN");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 3, "abc");
    std::istringstream in(text);
    auto msg =
        catch_message<ParseError>([&] { parse_patient_file(in, "B1", schema()); });
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("abc") != std::string::npos);
  }

  SUBCASE("lowercase nan is not a missing marker") {
    auto pos = text.find("NaN");
    text.replace(pos, 3, "nan");
    std::istringstream in(text);
    auto msg =
        catch_message<ParseError>([&] { parse_patient_file(in, "B1", schema()); });
    CHECK(msg.find("nan") != std::string::npos);
  }

  SUBCASE("infinite value rejected") {
    auto pos = text.find("NaN");
    text.replace(pos, 3, "inf");
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_patient_file(in, "B1", schema()), ParseError);
  }

  SUBCASE("wrong field count") {
    text += "1|2|3\n";
    std::istringstream in(text);
    auto msg =
        catch_message<ParseError>([&] { parse_patient_file(in, "B1", schema()); });
    CHECK(msg.find("line 5") != std::string::npos);
  }

  SUBCASE("label outside 0/1") {
    auto line_start = text.rfind('\n', text.size() - 2);
    std::string last = text.substr(line_start + 1);
    last.replace(last.rfind('|') + 1, std::string::npos, "2\n");
    text = text.substr(0, line_start + 1) + last;
    std::istringstream in(text);
    auto msg =
        catch_message<ParseError>([&] { parse_patient_file(in, "B1", schema()); });
    CHECK(msg.find("label") != std::string::npos);
  }

  SUBCASE("missing label") {
    auto line_start = text.rfind('\n', text.size() - 2);
    std::string last = text.substr(line_start + 1);
    last.replace(last.rfind('|') + 1, std::string::npos, "NaN\n");
    text = text.substr(0, line_start + 1) + last;
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_patient_file(in, "B1", schema()), ParseError);
  }

  SUBCASE("wrong header") {
    text.replace(0, 2, "XX");
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_patient_file(in, "B1", schema()), ParseError);
  }

  SUBCASE("empty stream") {
    std::istringstream in("");
    CHECK_THROWS_AS(parse_patient_file(in, "B1", schema()), ParseError);
  }
}

TEST_CASE("load_cohort filters short stays and sorts by id") {
  TempDir dir("ingest-cohort");
  Rng rng(88);
  auto p24 = random_record("A24", 24, rng);
  auto p23 = random_record("B23", 23, rng);
  auto p30 = random_record("C30", 30, rng);
  for (auto* rec : {&p24, &p23, &p30})
    for (std::size_t t = 0; t < rec->rows.size(); ++t) set_label(*rec, t, 0);
  set_label(p30, 29, 1);
  // Written out of id order on purpose.
  write_file(dir.path() / "C30.psv", serialize_patient(p30, schema()));
  write_file(dir.path() / "A24.psv", serialize_patient(p24, schema()));
  write_file(dir.path() / "B23.psv", serialize_patient(p23, schema()));
  write_file(dir.path() / "notes.txt", "not a psv\n");

  auto cohort = load_cohort(dir.path());
  CHECK(cohort.stats.files_seen == 3);
  CHECK(cohort.stats.retained == 2);
  CHECK(cohort.stats.dropped_short == 1);
  CHECK(cohort.stats.septic == 1);
  REQUIRE(cohort.patients.size() == 2);
  CHECK(cohort.patients[0].patient_id == "A24");
  CHECK(cohort.patients[1].patient_id == "C30");
  CHECK(records_equal(cohort.patients[1], p30));

  auto lenient = load_cohort(dir.path(), 10);
  CHECK(lenient.stats.retained == 3);
  CHECK(lenient.patients[1].patient_id == "B23");

  auto strict = load_cohort(dir.path(), 31);
  CHECK(strict.stats.retained == 0);
  CHECK(strict.stats.dropped_short == 3);
}

TEST_CASE("load_cohort on an empty directory returns an empty cohort") {
  TempDir dir("ingest-empty");
  auto cohort = load_cohort(dir.path());
  CHECK(cohort.stats.files_seen == 0);
  CHECK(cohort.stats.retained == 0);
  CHECK(cohort.patients.empty());
  cohort.schema.validate();
}

TEST_CASE("load_cohort on a missing directory is an IoError") {
  CHECK_THROWS_AS(load_cohort("/nonexistent/alrt-test-path"), IoError);
}

TEST_CASE("load_cohort names the offending file on parse failure") {
  TempDir dir("ingest-corrupt");
  Rng rng(12);
  write_file(dir.path() / "OK.psv", serialize_patient(random_record("OK", 24, rng), schema()));
  auto bad = serialize_patient(random_record("BAD", 24, rng), schema());
  bad.replace(bad.find("NaN"), 3, "oops");
  write_file(dir.path() / "BAD.psv", bad);

  auto msg = catch_message<ParseError>([&] { load_cohort(dir.path()); });
  CHECK(msg.find("BAD.psv") != std::string::npos);
}

TEST_CASE("jsonl cache round-trips the cohort") {
  TempDir dir("ingest-jsonl");
  Rng rng(3);
  Cohort cohort;
  cohort.schema = schema();
  cohort.patients.push_back(random_record("J1", 25, rng));
  cohort.patients.push_back(random_record("J2", 26, rng));
  for (auto& rec : cohort.patients)
    for (std::size_t t = 0; t < rec.rows.size(); ++t) set_label(rec, t, 0);
  set_label(cohort.patients[1], 25, 1);
  cohort.stats.files_seen = 2;
  cohort.stats.retained = 2;
  cohort.stats.septic = 1;

  auto file = dir.path() / "cohort.jsonl";
  write_cohort_jsonl(cohort, file);
  auto back = read_cohort_jsonl(file);
  REQUIRE(back.patients.size() == 2);
  CHECK(records_equal(back.patients[0], cohort.patients[0]));
  CHECK(records_equal(back.patients[1], cohort.patients[1]));
  CHECK(back.stats.retained == 2);
  CHECK(back.stats.septic == 1);
}
