#include "alrt/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace alrt {

namespace {

std::string trim(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  std::size_t end = text.find_last_not_of(" \t");
  return text.substr(begin, end - begin + 1);
}

double parse_double(const std::string& value, const std::string& key,
                    const std::string& origin) {
  double out = 0.0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError(origin + ": key '" + key + "': expected a number, got '" +
                      value + "'");
  return out;
}

long long parse_integer(const std::string& value, const std::string& key,
                        const std::string& origin) {
  long long out = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size())
    throw ConfigError(origin + ": key '" + key + "': expected an integer, got '" +
                      value + "'");
  return out;
}

std::vector<SamplingMethod> parse_methods(const std::string& value,
                                          const std::string& origin) {
  std::vector<SamplingMethod> methods;
  std::stringstream stream(value);
  std::string token;
  while (std::getline(stream, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    methods.push_back(method_from_name(token));
  }
  if (methods.empty()) throw ConfigError(origin + ": key 'methods': empty list");
  return methods;
}

std::string methods_text(const std::vector<SamplingMethod>& methods) {
  std::string out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i) out += ',';
    out += std::string(method_name(methods[i]));
  }
  return out;
}

}  // namespace

void Manifest::validate() const {
  if (eval_mode != "timestep" && eval_mode != "patient")
    throw ConfigError("eval_mode must be 'timestep' or 'patient'");
  if (methods.empty()) throw ConfigError("methods must not be empty");
  if (min_hours == 0) throw ConfigError("min_hours must be positive");
  imputation_policy().validate();
  experiment_config().validate();
}

ExperimentConfig Manifest::experiment_config() const {
  ExperimentConfig config;
  config.method = methods.front();
  config.initial_fraction = initial_fraction;
  config.increment = increment;
  config.rounds = rounds;
  config.hidden_dim = hidden_dim;
  config.train.learning_rate = learning_rate;
  config.train.epochs = 1;  // the round loop drives epochs
  config.train.gradient_clip = gradient_clip;
  config.seed = seed;
  config.threshold = threshold;
  config.threads = threads;
  return config;
}

ImputationPolicy Manifest::imputation_policy() const {
  return ImputationPolicy{vital_ffill, lab_ffill};
}

Manifest parse_manifest_text(const std::string& text, const std::string& origin) {
  Manifest manifest;
  std::stringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ": line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = origin + ": line " + std::to_string(line_no);

    if (key == "dataset") {
      manifest.dataset = value;
    } else if (key == "output") {
      manifest.output = value;
    } else if (key == "seed") {
      manifest.seed = static_cast<std::uint64_t>(parse_integer(value, key, where));
    } else if (key == "methods") {
      manifest.methods = parse_methods(value, where);
    } else if (key == "initial_fraction") {
      manifest.initial_fraction = parse_double(value, key, where);
    } else if (key == "increment") {
      manifest.increment = parse_double(value, key, where);
    } else if (key == "rounds") {
      manifest.rounds = static_cast<int>(parse_integer(value, key, where));
    } else if (key == "hidden_dim") {
      manifest.hidden_dim = static_cast<std::size_t>(parse_integer(value, key, where));
    } else if (key == "learning_rate") {
      manifest.learning_rate = parse_double(value, key, where);
    } else if (key == "gradient_clip") {
      if (value == "none")
        manifest.gradient_clip.reset();
      else
        manifest.gradient_clip = parse_double(value, key, where);
    } else if (key == "threshold") {
      manifest.threshold = parse_double(value, key, where);
    } else if (key == "eval_mode") {
      manifest.eval_mode = value;
    } else if (key == "vital_ffill") {
      manifest.vital_ffill = static_cast<int>(parse_integer(value, key, where));
    } else if (key == "lab_ffill") {
      manifest.lab_ffill = static_cast<int>(parse_integer(value, key, where));
    } else if (key == "min_hours") {
      manifest.min_hours = static_cast<std::size_t>(parse_integer(value, key, where));
    } else if (key == "threads") {
      manifest.threads = static_cast<unsigned>(parse_integer(value, key, where));
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  return manifest;
}

Manifest parse_manifest_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read manifest " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest_text(buffer.str(), file.string());
}

std::string manifest_text(const Manifest& manifest) {
  std::string out;
  out += "dataset = " + manifest.dataset + "\n";
  out += "output = " + manifest.output + "\n";
  out += "seed = " + std::to_string(manifest.seed) + "\n";
  out += "methods = " + methods_text(manifest.methods) + "\n";
  out += "initial_fraction = " + format_double(manifest.initial_fraction) + "\n";
  out += "increment = " + format_double(manifest.increment) + "\n";
  out += "rounds = " + std::to_string(manifest.rounds) + "\n";
  out += "hidden_dim = " + std::to_string(manifest.hidden_dim) + "\n";
  out += "learning_rate = " + format_double(manifest.learning_rate) + "\n";
  out += "gradient_clip = " +
         (manifest.gradient_clip ? format_double(*manifest.gradient_clip)
                                 : std::string("none")) +
         "\n";
  out += "threshold = " + format_double(manifest.threshold) + "\n";
  out += "eval_mode = " + manifest.eval_mode + "\n";
  out += "vital_ffill = " + std::to_string(manifest.vital_ffill) + "\n";
  out += "lab_ffill = " + std::to_string(manifest.lab_ffill) + "\n";
  out += "min_hours = " + std::to_string(manifest.min_hours) + "\n";
  out += "threads = " + std::to_string(manifest.threads) + "\n";
  return out;
}

std::vector<ReportRow> report_rows(const CrossValidationResult& result) {
  std::vector<ReportRow> rows;
  rows.reserve(result.rows.size());
  for (const auto& row : result.rows) {
    ReportRow out;
    out.label = row.label;
    out.is_baseline = row.is_baseline;
    out.method =
        row.is_baseline ? "baseline" : std::string(method_name(row.method));
    out.fraction = row.fraction;
    out.timestep = row.mean_timestep;
    out.patient = row.mean_patient;
    out.mean_loss = row.mean_loss;
    rows.push_back(std::move(out));
  }
  return rows;
}

namespace {

const MetricSummary& summary_for(const ReportRow& row, const std::string& eval_mode) {
  return eval_mode == "patient" ? row.patient : row.timestep;
}

void require_eval_mode(const std::string& eval_mode) {
  if (eval_mode != "timestep" && eval_mode != "patient")
    throw ConfigError("eval_mode must be 'timestep' or 'patient'");
}

nlohmann::ordered_json summary_json(const MetricSummary& summary) {
  nlohmann::ordered_json obj;
  obj["specificity"] = summary.specificity;
  obj["sensitivity"] = summary.sensitivity;
  obj["precision"] = summary.precision;
  obj["accuracy"] = summary.accuracy;
  obj["auroc"] = summary.auroc;
  obj["auprc"] = summary.auprc;
  return obj;
}

MetricSummary summary_from_json(const nlohmann::json& obj) {
  MetricSummary summary;
  summary.specificity = obj.at("specificity").get<double>();
  summary.sensitivity = obj.at("sensitivity").get<double>();
  summary.precision = obj.at("precision").get<double>();
  summary.accuracy = obj.at("accuracy").get<double>();
  summary.auroc = obj.at("auroc").get<double>();
  summary.auprc = obj.at("auprc").get<double>();
  return summary;
}

nlohmann::ordered_json eval_json(const EvalReport& report) {
  nlohmann::ordered_json obj = summary_json(to_summary(report));
  obj["threshold"] = report.threshold;
  obj["precision_degenerate"] = report.precision_degenerate;
  nlohmann::ordered_json counts;
  counts["tp"] = report.counts.tp;
  counts["fp"] = report.counts.fp;
  counts["tn"] = report.counts.tn;
  counts["fn"] = report.counts.fn;
  obj["counts"] = std::move(counts);
  return obj;
}

}  // namespace

void write_metrics_csv(const std::vector<ReportRow>& rows, const std::string& eval_mode,
                       const std::filesystem::path& file) {
  require_eval_mode(eval_mode);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << "Model,Specificity,Sensitivity,Precision,Accuracy,AUROC,AUPRC\n";
  for (const auto& row : rows) {
    const MetricSummary& s = summary_for(row, eval_mode);
    out << row.label << ',' << format_double(s.specificity) << ','
        << format_double(s.sensitivity) << ',' << format_double(s.precision) << ','
        << format_double(s.accuracy) << ',' << format_double(s.auroc) << ','
        << format_double(s.auprc) << '\n';
  }
}

void write_curves_csv(const std::vector<ReportRow>& rows, const std::string& eval_mode,
                      const std::filesystem::path& file) {
  require_eval_mode(eval_mode);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << "model,method,fraction,auroc,auprc,mean_loss\n";
  for (const auto& row : rows) {
    const MetricSummary& s = summary_for(row, eval_mode);
    out << row.label << ',' << row.method << ',' << format_double(row.fraction) << ','
        << format_double(s.auroc) << ',' << format_double(s.auprc) << ','
        << format_double(row.mean_loss) << '\n';
  }
}

void write_transfers_csv(const FoldRun& fold, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << "method,round,patient_id,score\n";
  for (const auto& [method, result] : fold.method_runs) {
    for (const auto& record : result.rounds) {
      for (const auto& transfer : record.transferred) {
        out << method_name(method) << ',' << record.round << ',' << transfer.patient_id
            << ',' << format_double(transfer.score) << '\n';
      }
    }
  }
}

void write_report_json(const Manifest& manifest, const CrossValidationResult& result,
                       const std::filesystem::path& file) {
  nlohmann::ordered_json root;

  nlohmann::ordered_json mf;
  mf["dataset"] = manifest.dataset;
  mf["output"] = manifest.output;
  mf["seed"] = manifest.seed;
  mf["methods"] = methods_text(manifest.methods);
  mf["initial_fraction"] = manifest.initial_fraction;
  mf["increment"] = manifest.increment;
  mf["rounds"] = manifest.rounds;
  mf["hidden_dim"] = manifest.hidden_dim;
  if (manifest.gradient_clip)
    mf["gradient_clip"] = *manifest.gradient_clip;
  else
    mf["gradient_clip"] = nullptr;
  mf["learning_rate"] = manifest.learning_rate;
  mf["threshold"] = manifest.threshold;
  mf["eval_mode"] = manifest.eval_mode;
  mf["vital_ffill"] = manifest.vital_ffill;
  mf["lab_ffill"] = manifest.lab_ffill;
  mf["min_hours"] = manifest.min_hours;
  mf["threads"] = manifest.threads;
  root["manifest"] = std::move(mf);

  nlohmann::ordered_json folds = nlohmann::json::array();
  for (const auto& fold : result.folds) {
    nlohmann::ordered_json entry;
    entry["fold"] = fold.fold;
    entry["seed"] = fold.fold_seed;
    entry["test_patients"] = fold.test_ids.size();
    entry["test_ids"] = fold.test_ids;
    folds.push_back(std::move(entry));
  }
  root["folds"] = std::move(folds);

  nlohmann::ordered_json rows = nlohmann::json::array();
  const std::vector<ReportRow> flat = report_rows(result);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const ReportRow& row = flat[i];
    nlohmann::ordered_json entry;
    entry["label"] = row.label;
    entry["is_baseline"] = row.is_baseline;
    entry["method"] = row.method;
    entry["fraction"] = row.fraction;
    entry["mean_loss"] = row.mean_loss;
    entry["mean"]["timestep"] = summary_json(row.timestep);
    entry["mean"]["patient"] = summary_json(row.patient);
    nlohmann::ordered_json per_fold = nlohmann::json::array();
    for (const auto& eval : result.rows[i].folds) {
      nlohmann::ordered_json fe;
      fe["timestep"] = eval_json(eval.timestep);
      fe["patient"] = eval_json(eval.patient);
      fe["loss"] = eval.mean_loss;
      per_fold.push_back(std::move(fe));
    }
    entry["folds"] = std::move(per_fold);
    rows.push_back(std::move(entry));
  }
  root["rows"] = std::move(rows);

  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << root.dump(2) << '\n';
}

void render_report(const std::filesystem::path& report_json,
                   const std::filesystem::path& out_dir) {
  std::ifstream in(report_json);
  if (!in) throw IoError("cannot read " + report_json.string());
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(report_json.string() + ": " + e.what());
  }

  std::string eval_mode;
  std::vector<ReportRow> rows;
  try {
    eval_mode = root.at("manifest").at("eval_mode").get<std::string>();
    for (const auto& entry : root.at("rows")) {
      ReportRow row;
      row.label = entry.at("label").get<std::string>();
      row.is_baseline = entry.at("is_baseline").get<bool>();
      row.method = entry.at("method").get<std::string>();
      row.fraction = entry.at("fraction").get<double>();
      row.mean_loss = entry.at("mean_loss").get<double>();
      row.timestep = summary_from_json(entry.at("mean").at("timestep"));
      row.patient = summary_from_json(entry.at("mean").at("patient"));
      rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(report_json.string() + ": " + e.what());
  }

  std::filesystem::create_directories(out_dir);
  write_metrics_csv(rows, eval_mode, out_dir / "metrics.csv");
  write_curves_csv(rows, eval_mode, out_dir / "curves.csv");
}

std::string metrics_table(const std::vector<ReportRow>& rows,
                          const std::string& eval_mode) {
  require_eval_mode(eval_mode);
  std::size_t label_width = 5;  // "Model"
  for (const auto& row : rows) label_width = std::max(label_width, row.label.size());

  auto pad = [](const std::string& text, std::size_t to) {
    return text + std::string(to > text.size() ? to - text.size() : 1, ' ');
  };
  auto cell = [](double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(4);
    s << v;
    return s.str();
  };

  std::ostringstream out;
  out << pad("Model", label_width + 2) << pad("Specificity", 13) << pad("Sensitivity", 13)
      << pad("Precision", 11) << pad("Accuracy", 10) << pad("AUROC", 8) << "AUPRC\n";
  for (const auto& row : rows) {
    const MetricSummary& s = summary_for(row, eval_mode);
    out << pad(row.label, label_width + 2) << pad(cell(s.specificity), 13)
        << pad(cell(s.sensitivity), 13) << pad(cell(s.precision), 11)
        << pad(cell(s.accuracy), 10) << pad(cell(s.auroc), 8) << cell(s.auprc) << '\n';
  }
  return out.str();
}

}  // namespace alrt
