// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/sharpness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace lumistack {

ScoreConfig ScoreConfig::uniform(int steps) {
  if (steps < 1) fail(ErrorCode::kInvalidInput, "score config needs at least one step");
  return ScoreConfig{std::vector<double>(steps, 1.0)};
}

double ScoreConfig::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void ScoreConfig::validate() const {
  if (weights.empty()) fail(ErrorCode::kInvalidInput, "score config needs at least one step");
  for (double w : weights) {
    if (!std::isfinite(w) || w <= 0.0)
      fail(ErrorCode::kInvalidInput, "score weights must be finite and positive");
  }
}

ScalarField gradient_magnitude(const Image& luma) {
  if (luma.channels() != 1)
    fail(ErrorCode::kInvalidInput, "gradient needs a single-channel image");
  const int w = luma.width();
  const int h = luma.height();
  if (w < 3 || h < 3) fail(ErrorCode::kInvalidInput, "gradient needs an image of at least 3x3");

  auto px = [&](int x, int y) -> double {
    return luma.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
      out(x, y) = std::hypot(gx, gy);
    }
  }
  return out;
}

Threshold auto_threshold(const ScalarField& field) {
  if (field.empty()) fail(ErrorCode::kInvalidInput, "threshold of an empty field");
  const auto [lo_it, hi_it] = std::minmax_element(field.data().begin(), field.data().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) {
    const double width = hi > 0.0 ? hi / 256.0 : std::numeric_limits<double>::min();
    return {width, true};
  }

  constexpr int kBins = 256;
  const double bin_width = hi / kBins;
  std::array<double, kBins> hist{};
  for (double v : field.data()) {
    const int bin = std::min(kBins - 1, static_cast<int>(v / bin_width));
    hist[std::max(bin, 0)] += 1.0;
  }

  const double total = static_cast<double>(field.size());
  double sum_all = 0.0;
  for (int i = 0; i < kBins; ++i) sum_all += (i + 0.5) * hist[i];

  double weight0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_bin = 0;
  for (int t = 0; t < kBins - 1; ++t) {
    weight0 += hist[t];
    sum0 += (t + 0.5) * hist[t];
    const double weight1 = total - weight0;
    if (weight0 == 0.0 || weight1 == 0.0) continue;
    const double mean0 = sum0 / weight0;
    const double mean1 = (sum_all - sum0) / weight1;
    const double between = weight0 * weight1 * (mean0 - mean1) * (mean0 - mean1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  return {(best_bin + 1) * bin_width, false};
}

SharpnessLayer sharpness_scores(const ScalarField& gradient, double delta,
                                const ScoreConfig& cfg) {
  cfg.validate();
  if (!(delta > 0.0)) fail(ErrorCode::kInvalidInput, "threshold must be positive");
  SharpnessLayer out(gradient.width(), gradient.height());
  auto dst = out.data();
  const auto src = gradient.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    double score = 0.0;
    for (int m = 1; m <= cfg.steps(); ++m) {
      // u(0) = 1: a gradient exactly on the threshold counts.
      if (src[i] >= m * delta) score += cfg.weights[m - 1];
    }
    dst[i] = score;
  }
  return out;
}

}  // namespace lumistack
