// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/focusmap.hpp"

#include <algorithm>

#include "lumistack/parallel.hpp"

namespace lumistack {

DataCosts build_data_costs(std::span<const SharpnessLayer> layers, const ScoreConfig& cfg) {
  cfg.validate();
  if (layers.empty()) fail(ErrorCode::kInvalidInput, "no sharpness layers");
  const int w = layers.front().width();
  const int h = layers.front().height();
  for (const auto& layer : layers) {
    if (layer.width() != w || layer.height() != h)
      fail(ErrorCode::kInvalidInput, "sharpness layers differ in size");
  }
  const int k = static_cast<int>(layers.size());
  const double total = cfg.total_weight();
  DataCosts out{w, h, k, std::vector<double>(static_cast<std::size_t>(w) * h * k)};
  for (int label = 1; label <= k; ++label) {
    const auto scores = layers[label - 1].data();
    for (std::size_t i = 0; i < scores.size(); ++i)
      out.cost[i * k + (label - 1)] = std::max(0.0, total - scores[i]);
  }
  return out;
}

FocusMapResult compute_focus_map(const FocalStack& stack, const FocusMapOptions& options) {
  options.score.validate();
  const int k = stack.size();
  FocusMapResult result;
  if (k == 1) {
    result.map = FocusMap::constant(stack.width(), stack.height(), 1, 1);
    return result;
  }

  std::vector<SharpnessLayer> layers(k);
  result.thresholds.resize(k);
  parallel_for(k, options.threads, [&](int i) {
    const ScalarField grad = gradient_magnitude(to_luma(stack.image(i)));
    result.thresholds[i] = auto_threshold(grad);
    layers[i] = sharpness_scores(grad, result.thresholds[i].delta, options.score);
  });

  DataCosts costs = build_data_costs(layers, options.score);
  EnergyProblem problem{costs.width, costs.height, k, std::move(costs.cost), options.lambda};
  auto init = pointwise_argmin(problem);
  auto labels = alpha_expansion(problem, std::move(init), &result.stats);
  result.initial_energy = result.stats.sweep_energies.front();
  result.final_energy = result.stats.sweep_energies.back();
  result.map = FocusMap(Grid<int>(problem.width, problem.height, std::move(labels)), k);
  return result;
}

FocusMap median_filter_labels(const FocusMap& map, int radius, int threads) {
  if (radius < 0) fail(ErrorCode::kInvalidInput, "median radius must be non-negative");
  if (radius == 0) return map;
  const int w = map.width();
  const int h = map.height();
  Grid<int> out(w, h);
  parallel_for(h, threads, [&](int y) {
    std::vector<int> window;
    window.reserve((2 * radius + 1) * (2 * radius + 1));
    for (int x = 0; x < w; ++x) {
      window.clear();
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
          window.push_back(map(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1)));
      const auto mid = window.begin() + (window.size() - 1) / 2;
      std::nth_element(window.begin(), mid, window.end());
      out(x, y) = *mid;
    }
  });
  return FocusMap(std::move(out), map.label_count());
}

Mask in_focus_mask(const FocusMap& map, int label) {
  if (label < 1 || label > map.label_count())
    fail(ErrorCode::kInvalidInput, "mask label out of range");
  Mask out(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) out(x, y) = map(x, y) == label ? 1 : 0;
  return out;
}

}  // namespace lumistack
