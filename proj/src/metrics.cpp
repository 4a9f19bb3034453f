#include "alrt/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "alrt/core.hpp"

namespace alrt {

namespace {

void check_lengths(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.size() != labels.size())
    throw ConfigError("metrics: probs/labels length mismatch");
  if (probs.empty()) throw ConfigError("metrics: empty input");
}

}  // namespace

ConfusionCounts confusion_at_threshold(const std::vector<double>& probs,
                                       const std::vector<int>& labels,
                                       double threshold) {
  check_lengths(probs, labels);
  ConfusionCounts counts;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    if (labels[i] != 0) {
      predicted ? ++counts.tp : ++counts.fn;
    } else {
      predicted ? ++counts.fp : ++counts.tn;
    }
  }
  return counts;
}

double auroc(const std::vector<double>& probs, const std::vector<int>& labels) {
  check_lengths(probs, labels);
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

  // Midrank sum over positives (Mann-Whitney U).
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = probs.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw ConfigError("auroc: needs both classes present");
  const double n_pos_d = static_cast<double>(n_pos);
  return (positive_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * static_cast<double>(n_neg));
}

double auprc(const std::vector<double>& probs, const std::vector<int>& labels) {
  check_lengths(probs, labels);
  std::size_t n_pos = 0;
  for (int label : labels) n_pos += label != 0;
  if (n_pos == 0) throw ConfigError("auprc: no positives");

  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

  double area = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, predicted = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      ++predicted;
      if (labels[order[k]] != 0) ++tp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

EvalReport evaluate(const std::vector<double>& probs, const std::vector<int>& labels,
                    double threshold) {
  EvalReport report;
  report.threshold = threshold;
  report.counts = confusion_at_threshold(probs, labels, threshold);
  const auto& c = report.counts;
  const double total = static_cast<double>(c.tp + c.tn + c.fp + c.fn);
  report.accuracy = static_cast<double>(c.tp + c.tn) / total;
  report.sensitivity =
      c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                      : 0.0;
  report.specificity =
      c.tn + c.fp > 0 ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp)
                      : 0.0;
  if (c.tp + c.fp > 0) {
    report.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    report.precision = 0.0;
    report.precision_degenerate = true;
  }
  report.auroc = auroc(probs, labels);
  report.auprc = auprc(probs, labels);
  return report;
}

}  // namespace alrt
