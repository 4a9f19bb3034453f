#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "alrt/active_loop.hpp"
#include "alrt/core.hpp"
#include "alrt/explain.hpp"
#include "alrt/ingest.hpp"
#include "alrt/model.hpp"
#include "alrt/report.hpp"
#include "alrt/synth.hpp"

namespace {

using namespace alrt;

// 0 success, 2 parse, 3 config, 4 numeric, 1 anything else.
int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
}

struct IngestArgs {
  std::string data;
  std::size_t min_hours = 24;
  std::string cache;
  unsigned threads = 0;
};

void cmd_ingest(const IngestArgs& args) {
  const Cohort cohort = load_cohort(args.data, args.min_hours, args.threads);
  std::cout << cohort.stats.retained << " retained (" << cohort.stats.septic
            << " septic), " << cohort.stats.dropped_short << " dropped shorter than "
            << args.min_hours << " hours\n";
  if (!args.cache.empty()) {
    write_cohort_jsonl(cohort, args.cache);
    std::cout << "cached " << cohort.patients.size() << " patients to " << args.cache
              << '\n';
  }
}

struct SynthArgs {
  std::string out;
  SynthConfig config;
};

void cmd_synth(const SynthArgs& args) {
  const auto cohort = generate_cohort(args.config);
  write_cohort_psv(cohort, RawColumnSchema::physionet2019(), args.config, args.out);
  std::size_t septic = 0;
  for (const auto& patient : cohort) septic += is_septic(patient) ? 1 : 0;
  std::cout << "wrote " << cohort.size() << " patients (" << septic << " septic) to "
            << args.out << '\n';
}

struct ExperimentArgs {
  std::string manifest_file;
  Manifest manifest;  // defaults, then manifest file, then flag overrides
};

void run_experiment(const Manifest& manifest) {
  manifest.validate();
  if (manifest.dataset.empty()) throw ConfigError("experiment: dataset not set");
  if (manifest.output.empty()) throw ConfigError("experiment: output not set");

  const Cohort cohort =
      load_cohort(manifest.dataset, manifest.min_hours, manifest.threads);
  if (cohort.patients.empty())
    throw ConfigError("experiment: no patients in " + manifest.dataset);

  const CrossValidationResult result =
      run_cross_validation(cohort.patients, cohort.schema, manifest.imputation_policy(),
                           manifest.experiment_config(), manifest.methods);

  const std::filesystem::path out_dir(manifest.output);
  std::filesystem::create_directories(out_dir / "transfers");
  std::filesystem::create_directories(out_dir / "preprocess");

  write_text(out_dir / "manifest.txt", manifest_text(manifest));
  const std::vector<ReportRow> rows = report_rows(result);
  write_metrics_csv(rows, manifest.eval_mode, out_dir / "metrics.csv");
  write_curves_csv(rows, manifest.eval_mode, out_dir / "curves.csv");
  write_report_json(manifest, result, out_dir / "report.json");

  for (const FoldRun& fold : result.folds) {
    const std::string fold_name = "fold" + std::to_string(fold.fold);
    write_transfers_csv(fold, out_dir / "transfers" / (fold_name + ".csv"));
    save_preprocess_json(fold.preprocess, cohort.schema,
                         out_dir / "preprocess" / (fold_name + ".json"));

    const std::filesystem::path checkpoint_dir = out_dir / "checkpoints" / fold_name;
    std::filesystem::create_directories(checkpoint_dir);
    TrainConfig used = manifest.experiment_config().train;
    used.class_weights = fold.preprocess.weights;
    used.rng_seed = derive_seed(fold.fold_seed, "train");
    for (const auto& [method, run] : fold.method_runs) {
      for (const RoundRecord& record : run.rounds) {
        const std::string label = row_label(method, record.trained_fraction);
        save_checkpoint(record.snapshot, used, checkpoint_dir / (label + ".json"));
      }
    }
    save_checkpoint(fold.baseline.final_params, used,
                    checkpoint_dir / (std::string(kBaselineLabel) + ".json"));
  }

  std::cout << metrics_table(rows, manifest.eval_mode);
  std::cout << "wrote " << out_dir.string() << '\n';
}

struct ArtifactArgs {
  std::string checkpoint;
  std::string preprocess;
  std::string data;
  std::size_t min_hours = 24;
  int vital_ffill = 12;
  int lab_ffill = 36;
  double threshold = 0.5;
  std::string eval_mode = "timestep";
  std::string out;
  std::uint64_t seed = 7;
  int repeats = 5;
  unsigned threads = 0;
};

std::vector<FeatureSequence> load_and_preprocess(const ArtifactArgs& args,
                                                 Checkpoint& checkpoint,
                                                 RawColumnSchema& schema,
                                                 ClassWeights& weights) {
  checkpoint = load_checkpoint(args.checkpoint);
  const Cohort cohort = load_cohort(args.data, args.min_hours, args.threads);
  if (cohort.patients.empty())
    throw ConfigError("no patients in " + args.data);
  schema = cohort.schema;
  const PreprocessParams params = load_preprocess_json(cohort.schema, args.preprocess);
  weights = params.weights;
  const ImputationPolicy policy{args.vital_ffill, args.lab_ffill};
  return apply_preprocess(cohort.patients, cohort.schema, policy, params, args.threads);
}

void cmd_evaluate(const ArtifactArgs& args) {
  Checkpoint checkpoint;
  RawColumnSchema schema;
  ClassWeights weights;
  const auto sequences = load_and_preprocess(args, checkpoint, schema, weights);
  const SnapshotEvaluation eval = evaluate_snapshot(checkpoint.params, sequences,
                                                    weights, args.threshold, args.threads);

  const EvalReport& report = args.eval_mode == "patient" ? eval.patient : eval.timestep;
  ReportRow row;
  row.label = std::filesystem::path(args.checkpoint).stem().string();
  row.method = "checkpoint";
  row.timestep = to_summary(eval.timestep);
  row.patient = to_summary(eval.patient);
  row.mean_loss = eval.mean_loss;
  std::cout << metrics_table({row}, args.eval_mode);
  std::cout << "counts: tp " << report.counts.tp << ", fp " << report.counts.fp
            << ", tn " << report.counts.tn << ", fn " << report.counts.fn
            << " (threshold " << format_double(report.threshold) << ")\n";
  std::cout << "mean loss " << format_double(eval.mean_loss) << '\n';
  if (report.precision_degenerate)
    std::cout << "note: no positive predictions; precision reported as 0\n";
}

void cmd_explain(const ArtifactArgs& args) {
  Checkpoint checkpoint;
  RawColumnSchema schema;
  ClassWeights weights;
  const auto sequences = load_and_preprocess(args, checkpoint, schema, weights);
  const ImportanceReport report =
      permutation_importance(checkpoint.params, sequences, schema.feature_names(),
                             args.seed, args.repeats, args.threads);
  std::cout << importance_table(report, 10);
  if (!args.out.empty()) {
    std::filesystem::create_directories(args.out);
    const std::filesystem::path dir(args.out);
    write_importance_csv(report, dir / "importance.csv");
    write_text(dir / "importance.txt", importance_table(report, 10));
    std::cout << "wrote " << (dir / "importance.csv").string() << '\n';
  }
}

struct ReportArgs {
  std::string report;
  std::string out;
};

void cmd_report(const ReportArgs& args) {
  render_report(args.report, args.out);
  std::cout << "rendered metrics.csv and curves.csv to " << args.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-learning RNN pipeline for irregular clinical time series"};
  app.require_subcommand(1);
  std::function<void()> action;

  // ingest
  auto ingest_args = std::make_shared<IngestArgs>();
  CLI::App* ingest = app.add_subcommand("ingest", "Parse a directory of .psv files");
  ingest->add_option("--data", ingest_args->data, "Directory of .psv files")->required();
  ingest->add_option("--min-hours", ingest_args->min_hours, "Minimum record length");
  ingest->add_option("--cache", ingest_args->cache, "Write the cohort to a JSONL file");
  ingest->add_option("--threads", ingest_args->threads, "Worker threads (0 = auto)");
  ingest->callback([&action, ingest_args] {
    action = [ingest_args] { cmd_ingest(*ingest_args); };
  });

  // synth
  auto synth_args = std::make_shared<SynthArgs>();
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth->add_option("--out", synth_args->out, "Output directory")->required();
  synth->add_option("--patients", synth_args->config.n_patients, "Number of patients");
  synth->add_option("--seed", synth_args->config.seed, "Root seed");
  synth->add_option("--min-hours", synth_args->config.min_hours, "Shortest stay");
  synth->add_option("--max-hours", synth_args->config.max_hours, "Longest stay");
  synth->add_option("--positive-rate", synth_args->config.positive_rate,
                    "Septic patient probability");
  synth->add_option("--vital-missingness", synth_args->config.vital_missingness,
                    "Per-cell missing probability for vitals");
  synth->add_option("--lab-missingness", synth_args->config.lab_missingness,
                    "Per-cell missing probability for labs");
  synth->add_option("--signal-strength", synth_args->config.signal_strength,
                    "Label drift in stationary standard deviations");
  synth->callback([&action, synth_args] {
    action = [synth_args] { cmd_synth(*synth_args); };
  });

  // experiment
  auto exp_args = std::make_shared<ExperimentArgs>();
  auto methods_csv = std::make_shared<std::string>();
  auto clip_text = std::make_shared<std::string>();
  CLI::App* experiment =
      app.add_subcommand("experiment", "Cross-validated active-learning experiment");
  experiment->add_option("--manifest", exp_args->manifest_file, "Manifest file");
  CLI::Option* o_data = experiment->add_option("--data", "Dataset directory override");
  CLI::Option* o_out = experiment->add_option("--out", "Output directory override");
  CLI::Option* o_seed = experiment->add_option("--seed", "Root seed override");
  CLI::Option* o_methods =
      experiment->add_option("--methods", *methods_csv, "Comma-separated methods");
  CLI::Option* o_initial = experiment->add_option("--initial-fraction", "");
  CLI::Option* o_increment = experiment->add_option("--increment", "");
  CLI::Option* o_rounds = experiment->add_option("--rounds", "");
  CLI::Option* o_hidden = experiment->add_option("--hidden-dim", "");
  CLI::Option* o_lr = experiment->add_option("--learning-rate", "");
  CLI::Option* o_clip =
      experiment->add_option("--gradient-clip", *clip_text, "Number or 'none'");
  CLI::Option* o_threshold = experiment->add_option("--threshold", "");
  CLI::Option* o_eval = experiment->add_option("--eval-mode", "timestep | patient");
  CLI::Option* o_vffill = experiment->add_option("--vital-ffill", "");
  CLI::Option* o_lffill = experiment->add_option("--lab-ffill", "");
  CLI::Option* o_minh = experiment->add_option("--min-hours", "");
  CLI::Option* o_threads = experiment->add_option("--threads", "");
  experiment->callback([=, &action] {
    action = [=] {
      Manifest manifest;
      if (!exp_args->manifest_file.empty())
        manifest = parse_manifest_file(exp_args->manifest_file);
      if (*o_data) manifest.dataset = o_data->as<std::string>();
      if (*o_out) manifest.output = o_out->as<std::string>();
      if (*o_seed) manifest.seed = o_seed->as<std::uint64_t>();
      if (*o_methods) manifest.methods = [&] {
        std::vector<SamplingMethod> methods;
        std::stringstream stream(*methods_csv);
        std::string token;
        while (std::getline(stream, token, ','))
          if (!token.empty()) methods.push_back(method_from_name(token));
        return methods;
      }();
      if (*o_initial) manifest.initial_fraction = o_initial->as<double>();
      if (*o_increment) manifest.increment = o_increment->as<double>();
      if (*o_rounds) manifest.rounds = o_rounds->as<int>();
      if (*o_hidden) manifest.hidden_dim = o_hidden->as<std::size_t>();
      if (*o_lr) manifest.learning_rate = o_lr->as<double>();
      if (*o_clip) {
        if (*clip_text == "none")
          manifest.gradient_clip.reset();
        else
          manifest.gradient_clip = std::stod(*clip_text);
      }
      if (*o_threshold) manifest.threshold = o_threshold->as<double>();
      if (*o_eval) manifest.eval_mode = o_eval->as<std::string>();
      if (*o_vffill) manifest.vital_ffill = o_vffill->as<int>();
      if (*o_lffill) manifest.lab_ffill = o_lffill->as<int>();
      if (*o_minh) manifest.min_hours = o_minh->as<std::size_t>();
      if (*o_threads) manifest.threads = o_threads->as<unsigned>();
      run_experiment(manifest);
    };
  });

  // evaluate
  auto eval_args = std::make_shared<ArtifactArgs>();
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Evaluate a checkpoint on a dataset");
  evaluate->add_option("--checkpoint", eval_args->checkpoint, "Model checkpoint")
      ->required();
  evaluate->add_option("--preprocess", eval_args->preprocess, "Fitted pipeline JSON")
      ->required();
  evaluate->add_option("--data", eval_args->data, "Dataset directory")->required();
  evaluate->add_option("--min-hours", eval_args->min_hours, "Minimum record length");
  evaluate->add_option("--vital-ffill", eval_args->vital_ffill, "");
  evaluate->add_option("--lab-ffill", eval_args->lab_ffill, "");
  evaluate->add_option("--threshold", eval_args->threshold, "");
  evaluate->add_option("--eval-mode", eval_args->eval_mode, "timestep | patient");
  evaluate->add_option("--threads", eval_args->threads, "");
  evaluate->callback([&action, eval_args] {
    action = [eval_args] { cmd_evaluate(*eval_args); };
  });

  // explain
  auto explain_args = std::make_shared<ArtifactArgs>();
  CLI::App* explain =
      app.add_subcommand("explain", "Permutation feature importance for a checkpoint");
  explain->add_option("--checkpoint", explain_args->checkpoint, "Model checkpoint")
      ->required();
  explain->add_option("--preprocess", explain_args->preprocess, "Fitted pipeline JSON")
      ->required();
  explain->add_option("--data", explain_args->data, "Dataset directory")->required();
  explain->add_option("--min-hours", explain_args->min_hours, "Minimum record length");
  explain->add_option("--vital-ffill", explain_args->vital_ffill, "");
  explain->add_option("--lab-ffill", explain_args->lab_ffill, "");
  explain->add_option("--seed", explain_args->seed, "Permutation seed");
  explain->add_option("--repeats", explain_args->repeats, "Permutations per feature");
  explain->add_option("--out", explain_args->out, "Directory for CSV/text output");
  explain->add_option("--threads", explain_args->threads, "");
  explain->callback([&action, explain_args] {
    action = [explain_args] { cmd_explain(*explain_args); };
  });

  // report
  auto report_args = std::make_shared<ReportArgs>();
  CLI::App* report = app.add_subcommand("report", "Re-render tables from a report.json");
  report->add_option("--report", report_args->report, "report.json path")->required();
  report->add_option("--out", report_args->out, "Output directory")->required();
  report->callback([&action, report_args] {
    action = [report_args] { cmd_report(*report_args); };
  });

  CLI11_PARSE(app, argc, argv);
  return run_guarded(action);
}
