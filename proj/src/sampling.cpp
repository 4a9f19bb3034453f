#include "alrt/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace alrt {

std::string_view method_name(SamplingMethod method) {
  switch (method) {
    case SamplingMethod::kLeastConfident: return "lc";
    case SamplingMethod::kMargin: return "margin";
    case SamplingMethod::kEntropy: return "entropy";
    case SamplingMethod::kNormLeastConfident: return "norm_lc";
    case SamplingMethod::kNormMargin: return "norm_margin";
    case SamplingMethod::kNormEntropy: return "norm_entropy";
  }
  throw ConfigError("unknown sampling method");
}

SamplingMethod method_from_name(std::string_view name) {
  if (name == "lc") return SamplingMethod::kLeastConfident;
  if (name == "margin") return SamplingMethod::kMargin;
  if (name == "entropy") return SamplingMethod::kEntropy;
  if (name == "norm_lc") return SamplingMethod::kNormLeastConfident;
  if (name == "norm_margin") return SamplingMethod::kNormMargin;
  if (name == "norm_entropy") return SamplingMethod::kNormEntropy;
  throw ConfigError("unknown sampling method '" + std::string(name) + "'");
}

bool is_normalized(SamplingMethod method) {
  return method == SamplingMethod::kNormLeastConfident ||
         method == SamplingMethod::kNormMargin ||
         method == SamplingMethod::kNormEntropy;
}

SamplingMethod normalized_variant(SamplingMethod method) {
  switch (method) {
    case SamplingMethod::kLeastConfident:
    case SamplingMethod::kNormLeastConfident:
      return SamplingMethod::kNormLeastConfident;
    case SamplingMethod::kMargin:
    case SamplingMethod::kNormMargin:
      return SamplingMethod::kNormMargin;
    case SamplingMethod::kEntropy:
    case SamplingMethod::kNormEntropy:
      return SamplingMethod::kNormEntropy;
  }
  throw ConfigError("unknown sampling method");
}

SamplingMethod unnormalized_variant(SamplingMethod method) {
  switch (method) {
    case SamplingMethod::kLeastConfident:
    case SamplingMethod::kNormLeastConfident:
      return SamplingMethod::kLeastConfident;
    case SamplingMethod::kMargin:
    case SamplingMethod::kNormMargin:
      return SamplingMethod::kMargin;
    case SamplingMethod::kEntropy:
    case SamplingMethod::kNormEntropy:
      return SamplingMethod::kEntropy;
  }
  throw ConfigError("unknown sampling method");
}

std::string_view method_suffix(SamplingMethod method) {
  switch (method) {
    case SamplingMethod::kLeastConfident:
    case SamplingMethod::kNormLeastConfident:
      return "lc";
    case SamplingMethod::kMargin:
    case SamplingMethod::kNormMargin:
      return "m";
    case SamplingMethod::kEntropy:
    case SamplingMethod::kNormEntropy:
      return "e";
  }
  throw ConfigError("unknown sampling method");
}

namespace {

void require_nonempty(const SequenceProbabilities& probs) {
  if (probs.empty()) throw ConfigError("scorer: empty probability sequence");
}

double reduce(double total, std::size_t t_count, bool normalized) {
  return normalized ? total / static_cast<double>(t_count) : total;
}

}  // namespace

double score_least_confident(const SequenceProbabilities& probs, bool normalized) {
  require_nonempty(probs);
  double total = 0.0;
  for (double p : probs) total += 1.0 - std::max(p, 1.0 - p);
  return reduce(total, probs.size(), normalized);
}

double score_margin(const SequenceProbabilities& probs, bool normalized) {
  require_nonempty(probs);
  double total = 0.0;
  for (double p : probs) total += std::abs(2.0 * p - 1.0);
  return reduce(total, probs.size(), normalized);
}

double score_entropy(const SequenceProbabilities& probs, bool normalized) {
  require_nonempty(probs);
  double total = 0.0;
  for (double p : probs) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    total += h;
  }
  return reduce(total, probs.size(), normalized);
}

double score_sequence(const SequenceProbabilities& probs, SamplingMethod method) {
  const bool normalized = is_normalized(method);
  switch (unnormalized_variant(method)) {
    case SamplingMethod::kLeastConfident:
      return score_least_confident(probs, normalized);
    case SamplingMethod::kMargin:
      return score_margin(probs, normalized);
    default:
      return score_entropy(probs, normalized);
  }
}

double UncertaintyScore::uncertainty_key() const {
  switch (unnormalized_variant(method)) {
    case SamplingMethod::kMargin:
      return -score;  // smallest margin = most uncertain
    default:
      return score;
  }
}

std::vector<std::string> select_batch(const std::vector<UncertaintyScore>& scores,
                                      std::size_t k) {
  if (k > scores.size())
    throw ConfigError("select_batch: k=" + std::to_string(k) + " exceeds pool of " +
                      std::to_string(scores.size()));
  if (!scores.empty()) {
    const SamplingMethod method = scores.front().method;
    for (const auto& s : scores)
      if (s.method != method)
        throw ConfigError("select_batch: mixed sampling methods");
  }
  std::vector<const UncertaintyScore*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const UncertaintyScore* a, const UncertaintyScore* b) {
              const double ka = a->uncertainty_key();
              const double kb = b->uncertainty_key();
              if (ka != kb) return ka > kb;
              return a->patient_id < b->patient_id;
            });
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(order[i]->patient_id);
  return out;
}

}  // namespace alrt
