#pragma once

#include <cstddef>
#include <vector>

namespace alrt {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

/// The evaluation bundle for one model on one test fold.
struct EvalReport {
  double specificity = 0.0;
  double sensitivity = 0.0;
  double precision = 0.0;
  double accuracy = 0.0;
  double auroc = 0.0;
  double auprc = 0.0;
  ConfusionCounts counts;
  double threshold = 0.5;
  bool precision_degenerate = false;  // TP + FP == 0, precision defined as 0
};

/// Prediction = 1 iff p >= threshold, tallied over all given timesteps.
ConfusionCounts confusion_at_threshold(const std::vector<double>& probs,
                                       const std::vector<int>& labels,
                                       double threshold);

/// Mann-Whitney AUROC: P(score+ > score-) + 0.5 P(tie), exact via midranks.
/// Both classes must be present.
double auroc(const std::vector<double>& probs, const std::vector<int>& labels);

/// Area under the precision-recall step curve (descending-threshold sweep,
/// step interpolation). At least one positive required.
double auprc(const std::vector<double>& probs, const std::vector<int>& labels);

EvalReport evaluate(const std::vector<double>& probs, const std::vector<int>& labels,
                    double threshold = 0.5);

}  // namespace alrt
