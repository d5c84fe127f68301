// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <vector>

#include "lumistack/core.hpp"
#include "lumistack/tomography.hpp"

namespace lumistack {

/// All-in-focus composite: each pixel from the stack image its label names.
Image extended_focus(const FocalStack& stack, const FocusMap& focus);

/// Sub-aperture view at integer u; |u| <= (U-1)/2.
Image view_at(const LightFieldSlab& slab, int u);

Image refocus(const LightFieldSlab& slab, double slope, int threads = 1);

/// Slope of a plane at `depth_m` under the slab's reference plane and
/// aperture scale.
double slope_for_depth(const LightFieldSlab& slab, double depth_m);

struct RefocusResult {
  Image image;
  int label = 0;
  double depth_m = 0.0;
  double slope = 0.0;
};

/// Refocus on the layer under pixel (x, y) of the focus map.
RefocusResult refocus_at_point(const LightFieldSlab& slab, const FocusMap& focus,
                               const DepthMap& depth, double focal_length_m,
                               double aperture_scale, int x, int y, int threads = 1);

/// n evenly spaced integer u values from u_min to u_max, rounded, duplicates
/// dropped in order.
std::vector<int> sweep_positions(int u_min, int u_max, int frames);

struct SweepFrame {
  int u;
  Image image;
};

std::vector<SweepFrame> perspective_sweep(const LightFieldSlab& slab, int u_min, int u_max,
                                          int frames);

}  // namespace lumistack
