#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "alrt/model.hpp"

namespace alrt {

/// The six acquisition scorers: least-confident, margin, and entropy, each in
/// a raw (summed over timesteps) and a length-normalized (mean) form.
enum class SamplingMethod {
  kLeastConfident,
  kMargin,
  kEntropy,
  kNormLeastConfident,
  kNormMargin,
  kNormEntropy,
};

std::string_view method_name(SamplingMethod method);       // e.g. "norm_entropy"
SamplingMethod method_from_name(std::string_view name);
bool is_normalized(SamplingMethod method);
SamplingMethod normalized_variant(SamplingMethod method);
SamplingMethod unnormalized_variant(SamplingMethod method);

/// Report row suffix: "lc", "m", or "e" (normalization-independent).
std::string_view method_suffix(SamplingMethod method);

/// Per timestep: 1 - max(p, 1-p). Normalized = mean over timesteps, raw = sum.
double score_least_confident(const SequenceProbabilities& probs, bool normalized);
/// Per timestep: |2p - 1|, the gap between the two class probabilities.
/// Smaller margin = more uncertain.
double score_margin(const SequenceProbabilities& probs, bool normalized);
/// Per timestep: binary entropy in nats.
double score_entropy(const SequenceProbabilities& probs, bool normalized);

double score_sequence(const SequenceProbabilities& probs, SamplingMethod method);

struct UncertaintyScore {
  std::string patient_id;
  double score = 0.0;
  SamplingMethod method = SamplingMethod::kNormEntropy;

  /// Ordering key where higher always means more uncertain; margin scores
  /// are negated internally so the rule holds for all six methods.
  double uncertainty_key() const;
};

/// The k most-uncertain patient ids under the shared method's ordering.
/// Ties break by ascending patient_id. All scores must share one method and
/// k must not exceed the pool size.
std::vector<std::string> select_batch(const std::vector<UncertaintyScore>& scores,
                                      std::size_t k);

}  // namespace alrt
