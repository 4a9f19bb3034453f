#include "alrt/explain.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "alrt/metrics.hpp"

namespace alrt {

namespace {

std::vector<double> pooled_probabilities(const ModelParams& params,
                                         const std::vector<Matrix>& matrices,
                                         unsigned threads) {
  std::vector<SequenceProbabilities> per_seq(matrices.size());
  parallel_for(
      matrices.size(), [&](std::size_t i) { per_seq[i] = forward(params, matrices[i]); },
      threads);
  std::vector<double> pooled;
  for (const auto& probs : per_seq) pooled.insert(pooled.end(), probs.begin(), probs.end());
  return pooled;
}

}  // namespace

ImportanceReport permutation_importance(const ModelParams& params,
                                        const std::vector<FeatureSequence>& test,
                                        const std::vector<std::string>& feature_names,
                                        std::uint64_t seed, int repeats,
                                        unsigned threads) {
  if (test.empty()) throw ConfigError("permutation_importance: empty test fold");
  if (repeats <= 0) throw ConfigError("permutation_importance: repeats must be positive");
  const std::size_t n_features = feature_names.size();
  if (n_features != params.input_dim)
    throw ConfigError("permutation_importance: feature-name count does not match model");

  std::vector<Matrix> working;
  std::vector<int> pooled_labels;
  working.reserve(test.size());
  for (const auto& seq : test) {
    if (seq.matrix.cols != n_features)
      throw ConfigError("permutation_importance: sequence width mismatch");
    working.push_back(seq.matrix);
    pooled_labels.insert(pooled_labels.end(), seq.labels.begin(), seq.labels.end());
  }
  const std::size_t total_rows = pooled_labels.size();

  ImportanceReport report;
  report.permutation_seed = seed;
  report.repeats = repeats;
  report.baseline_auroc =
      auroc(pooled_probabilities(params, working, threads), pooled_labels);

  std::vector<double> column(total_rows);
  std::vector<double> shuffled(total_rows);
  report.ranking.reserve(n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    std::size_t cursor = 0;
    for (const Matrix& m : working)
      for (std::size_t t = 0; t < m.rows; ++t) column[cursor++] = m(t, j);

    const std::uint64_t feature_seed = derive_seed(seed, "feature", j);
    double auroc_sum = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
      shuffled = column;
      Rng rng(derive_seed(feature_seed, "repeat", static_cast<std::uint64_t>(rep)));
      rng.shuffle(shuffled);
      cursor = 0;
      for (Matrix& m : working)
        for (std::size_t t = 0; t < m.rows; ++t) m(t, j) = shuffled[cursor++];
      auroc_sum += auroc(pooled_probabilities(params, working, threads), pooled_labels);
    }
    // restore the column before moving on
    std::size_t restore = 0;
    for (Matrix& m : working)
      for (std::size_t t = 0; t < m.rows; ++t) m(t, j) = column[restore++];

    report.ranking.push_back(FeatureImportance{
        feature_names[j],
        report.baseline_auroc - auroc_sum / static_cast<double>(repeats)});
  }

  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) {
                     return a.importance > b.importance;
                   });
  return report;
}

void write_importance_csv(const ImportanceReport& report,
                          const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "rank,feature,importance\n";
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    out << (i + 1) << ',' << report.ranking[i].feature << ','
        << format_double(report.ranking[i].importance) << '\n';
  }
}

std::string importance_table(const ImportanceReport& report, std::size_t top_n) {
  std::size_t width = 7;  // "feature"
  const std::size_t shown = std::min(top_n, report.ranking.size());
  for (std::size_t i = 0; i < shown; ++i)
    width = std::max(width, report.ranking[i].feature.size());

  auto pad = [](const std::string& text, std::size_t to) {
    return text + std::string(to > text.size() ? to - text.size() : 1, ' ');
  };

  std::ostringstream out;
  out << "baseline AUROC " << format_double(report.baseline_auroc) << " ("
      << report.repeats << (report.repeats == 1 ? " repeat)\n" : " repeats)\n");
  out << pad("rank", 6) << pad("feature", width + 2) << "importance\n";
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& entry = report.ranking[i];
    out << pad(std::to_string(i + 1), 6) << pad(entry.feature, width + 2)
        << format_double(entry.importance) << '\n';
  }
  return out.str();
}

}  // namespace alrt
