// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <span>
#include <vector>

#include "lumistack/core.hpp"
#include "lumistack/graphcut.hpp"
#include "lumistack/sharpness.hpp"

namespace lumistack {

/// D(X,k) = total weight - F_k(X), K entries per pixel.
struct DataCosts {
  int width = 0;
  int height = 0;
  int labels = 0;
  std::vector<double> cost;

  double at(int x, int y, int label) const {
    return cost[(static_cast<std::size_t>(y) * width + x) * labels + (label - 1)];
  }
};

DataCosts build_data_costs(std::span<const SharpnessLayer> layers, const ScoreConfig& cfg);

struct FocusMapOptions {
  ScoreConfig score;
  double lambda = 1.0;
  int threads = 1;
};

struct FocusMapResult {
  FocusMap map;
  std::vector<Threshold> thresholds;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  ExpansionStats stats;
};

/// Sharpness layers -> data costs -> alpha-expansion started from the
/// per-pixel argmin. K = 1 short-circuits to a constant map.
FocusMapResult compute_focus_map(const FocalStack& stack, const FocusMapOptions& options);

/// Lower median over a (2r+1)^2 window with replicated borders.
FocusMap median_filter_labels(const FocusMap& map, int radius, int threads = 1);

Mask in_focus_mask(const FocusMap& map, int label);

}  // namespace lumistack
