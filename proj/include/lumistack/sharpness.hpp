// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <vector>

#include "lumistack/core.hpp"

namespace lumistack {

/// Weights of the stepped gradient thresholds; score = sum of weights whose
/// threshold m * delta the gradient reaches.
struct ScoreConfig {
  std::vector<double> weights = std::vector<double>(5, 1.0);

  static ScoreConfig uniform(int steps);
  int steps() const noexcept { return static_cast<int>(weights.size()); }
  double total_weight() const;
  void validate() const;
};

struct Threshold {
  double delta = 0.0;
  bool textureless = false;
};

using SharpnessLayer = ScalarField;

/// Sobel gradient magnitude with replicated borders. Needs a 1-channel image
/// of at least 3x3.
ScalarField gradient_magnitude(const Image& luma);

/// Otsu threshold over a 256-bin histogram spanning [0, max]. A constant field
/// is flagged textureless.
Threshold auto_threshold(const ScalarField& field);

SharpnessLayer sharpness_scores(const ScalarField& gradient, double delta,
                                const ScoreConfig& cfg);

}  // namespace lumistack
