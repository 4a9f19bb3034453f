#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "alrt/core.hpp"
#include "alrt/metrics.hpp"
#include "oracles.hpp"

using namespace alrt;

namespace {

struct ScoreSet {
  std::vector<double> probs;
  std::vector<int> labels;
};

// Random set with both classes; optionally quantized to force heavy ties.
ScoreSet random_set(Rng& rng, std::size_t n, bool quantize) {
  ScoreSet s;
  s.probs.resize(n);
  s.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double p = rng.uniform();
    if (quantize) p = std::round(p * 8.0) / 8.0;
    s.probs[i] = p;
    s.labels[i] = rng.uniform() < 0.3 ? 1 : 0;
  }
  s.labels[0] = 1;
  s.labels[1] = 0;
  return s;
}

}  // namespace

TEST_CASE("confusion counts follow the >= threshold convention") {
  auto c = confusion_at_threshold({0.9, 0.1}, {1, 0}, 0.5);
  CHECK(c.tp == 1);
  CHECK(c.tn == 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);

  c = confusion_at_threshold({0.5}, {0}, 0.5);
  CHECK(c.fp == 1);

  c = confusion_at_threshold({0.6, 0.6, 0.4}, {1, 0, 1}, 0.5);
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 0);

  CHECK_THROWS_AS(confusion_at_threshold({0.5}, {0, 1}, 0.5), ConfigError);
  CHECK_THROWS_AS(confusion_at_threshold({}, {}, 0.5), ConfigError);
}

TEST_CASE("auroc handles separable, random, and tied scores") {
  CHECK(auroc({0.9, 0.8, 0.3}, {1, 0, 0}) == 1.0);
  CHECK(auroc({0.1, 0.9}, {1, 0}) == 0.0);
  CHECK(auroc({0.7, 0.7, 0.7}, {1, 0, 1}) == 0.5);

  // One tie between a positive and a negative counts half.
  CHECK(auroc({0.5, 0.5, 0.2}, {1, 0, 0}) == doctest::Approx(0.75).epsilon(1e-15));

  // Hand-counted pairs: 3 wins out of 4.
  CHECK(auroc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) ==
        doctest::Approx(0.75).epsilon(1e-15));

  CHECK_THROWS_AS(auroc({0.5, 0.6}, {1, 1}), ConfigError);
  CHECK_THROWS_AS(auroc({0.5, 0.6}, {0, 0}), ConfigError);
}

TEST_CASE("auprc reproduces the worked example and edge shapes") {
  CHECK(auprc({0.9, 0.8, 0.3}, {1, 0, 1}) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(auprc({0.9, 0.8, 0.3}, {1, 1, 0}) == 1.0);

  // Constant scores collapse to a single point at prevalence.
  CHECK(auprc({0.4, 0.4, 0.4, 0.4}, {1, 0, 0, 0}) ==
        doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(auprc({0.2, 0.4}, {0, 0}), ConfigError);
}

TEST_CASE("auroc and auprc match brute-force oracles") {
  Rng rng(606);
  for (int trial = 0; trial < 300; ++trial) {
    auto s = random_set(rng, 2 + rng.uniform_index(150), trial % 3 == 0);
    REQUIRE(auroc(s.probs, s.labels) ==
            doctest::Approx(oracle::auroc(s.probs, s.labels)).epsilon(1e-9));
    REQUIRE(auprc(s.probs, s.labels) ==
            doctest::Approx(oracle::auprc(s.probs, s.labels)).epsilon(1e-9));
  }
}

TEST_CASE("auroc is invariant under strictly monotone transforms") {
  Rng rng(17);
  auto s = random_set(rng, 80, true);
  double base = auroc(s.probs, s.labels);
  auto warped = s.probs;
  for (double& p : warped) p = std::tanh(3.0 * p - 1.0);
  CHECK(auroc(warped, s.labels) == base);
}

TEST_CASE("complement symmetry swaps sensitivity and specificity") {
  Rng rng(29);
  std::vector<double> probs;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    double p = rng.uniform();
    if (std::abs(p - 0.5) < 0.01) p = 0.6;  // keep off the threshold boundary
    probs.push_back(p);
    labels.push_back(rng.uniform() < 0.4 ? 1 : 0);
  }
  labels[0] = 1;
  labels[1] = 0;

  auto flipped_probs = probs;
  for (double& p : flipped_probs) p = 1.0 - p;
  auto flipped_labels = labels;
  for (int& y : flipped_labels) y = 1 - y;

  auto a = evaluate(probs, labels);
  auto b = evaluate(flipped_probs, flipped_labels);
  CHECK(a.sensitivity == doctest::Approx(b.specificity).epsilon(1e-12));
  CHECK(a.specificity == doctest::Approx(b.sensitivity).epsilon(1e-12));
  CHECK(a.accuracy == doctest::Approx(b.accuracy).epsilon(1e-12));
  // Reversing the ranking and swapping the classes cancel out.
  CHECK(a.auroc == doctest::Approx(b.auroc).epsilon(1e-12));
  // Reversing the ranking alone mirrors the area.
  auto c = evaluate(flipped_probs, labels);
  CHECK(a.auroc == doctest::Approx(1.0 - c.auroc).epsilon(1e-12));
}

TEST_CASE("evaluate derives the point metrics from its own counts") {
  std::vector<double> probs{0.9, 0.8, 0.3, 0.6, 0.2, 0.55};
  std::vector<int> labels{1, 0, 1, 1, 0, 0};
  auto r = evaluate(probs, labels);

  double tp = static_cast<double>(r.counts.tp), fp = static_cast<double>(r.counts.fp);
  double tn = static_cast<double>(r.counts.tn), fn = static_cast<double>(r.counts.fn);
  CHECK(r.counts.tp + r.counts.fp + r.counts.tn + r.counts.fn == labels.size());
  CHECK(r.sensitivity == doctest::Approx(tp / (tp + fn)).epsilon(1e-15));
  CHECK(r.specificity == doctest::Approx(tn / (tn + fp)).epsilon(1e-15));
  CHECK(r.precision == doctest::Approx(tp / (tp + fp)).epsilon(1e-15));
  CHECK(r.accuracy ==
        doctest::Approx((tp + tn) / static_cast<double>(labels.size())).epsilon(1e-15));
  CHECK(r.auroc == doctest::Approx(oracle::auroc(probs, labels)).epsilon(1e-12));
  CHECK(r.auprc == doctest::Approx(oracle::auprc(probs, labels)).epsilon(1e-12));
  CHECK(r.threshold == 0.5);
  CHECK_FALSE(r.precision_degenerate);
}

TEST_CASE("precision degenerates to 0 when nothing is predicted positive") {
  auto r = evaluate({0.1, 0.2, 0.3}, {1, 0, 0}, 0.9);
  CHECK(r.counts.tp == 0);
  CHECK(r.counts.fp == 0);
  CHECK(r.precision == 0.0);
  CHECK(r.precision_degenerate);
  CHECK(r.sensitivity == 0.0);
}

TEST_CASE("custom thresholds shift the confusion split") {
  auto strict = evaluate({0.7, 0.75, 0.2}, {1, 0, 1}, 0.72);
  CHECK(strict.counts.tp == 0);
  CHECK(strict.counts.fp == 1);
  auto loose = evaluate({0.7, 0.75, 0.2}, {1, 0, 1}, 0.1);
  CHECK(loose.counts.tp == 2);
  CHECK(loose.counts.fp == 1);
  CHECK(loose.specificity == 0.0);
}
