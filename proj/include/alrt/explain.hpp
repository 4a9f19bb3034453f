#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alrt/model.hpp"
#include "alrt/preprocess.hpp"

namespace alrt {

struct FeatureImportance {
  std::string feature;
  double importance = 0.0;  // baseline AUROC minus mean permuted AUROC
};

struct ImportanceReport {
  std::vector<FeatureImportance> ranking;  // descending importance, all features
  double baseline_auroc = 0.0;
  std::uint64_t permutation_seed = 0;
  int repeats = 1;
};

/// Permutation importance over the pooled timesteps of a test fold: column j
/// is shuffled across every hour of every patient (repeats times, averaged)
/// and the pooled-timestep AUROC drop is attributed to feature j. A feature
/// the model never reads scores exactly 0.
ImportanceReport permutation_importance(const ModelParams& params,
                                        const std::vector<FeatureSequence>& test,
                                        const std::vector<std::string>& feature_names,
                                        std::uint64_t seed, int repeats,
                                        unsigned threads = 0);

/// CSV rows: rank,feature,importance.
void write_importance_csv(const ImportanceReport& report,
                          const std::filesystem::path& file);

/// Fixed-width text table of the top_n features.
std::string importance_table(const ImportanceReport& report, std::size_t top_n = 10);

}  // namespace alrt
