// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/render.hpp"

#include <algorithm>
#include <cmath>

#include "lumistack/optics.hpp"

namespace lumistack {

Image extended_focus(const FocalStack& stack, const FocusMap& focus) {
  if (focus.width() != stack.width() || focus.height() != stack.height())
    fail(ErrorCode::kInvalidInput, "focus map size does not match the stack");
  if (focus.label_count() != stack.size())
    fail(ErrorCode::kInvalidInput, "focus map label count does not match the stack");
  const int channels = stack.channels();
  std::vector<float> out(static_cast<std::size_t>(stack.width()) * stack.height() * channels);
  for (int y = 0; y < stack.height(); ++y) {
    for (int x = 0; x < stack.width(); ++x) {
      const Image& src = stack.image(focus(x, y) - 1);
      for (int c = 0; c < channels; ++c)
        out[(static_cast<std::size_t>(y) * stack.width() + x) * channels + c] = src.at(x, y, c);
    }
  }
  return Image(stack.width(), stack.height(), channels, std::move(out));
}

Image view_at(const LightFieldSlab& slab, int u) {
  if (std::abs(u) > slab.half_aperture())
    fail(ErrorCode::kInvalidInput, "view u=" + std::to_string(u) + " outside the slab aperture");
  const int channels = slab.channels();
  std::vector<float> out(static_cast<std::size_t>(slab.width()) * slab.height() * channels);
  auto dst = out.begin();
  for (int y = 0; y < slab.height(); ++y) {
    for (int x = 0; x < slab.width(); ++x)
      for (int c = 0; c < channels; ++c) *dst++ = slab.at(x, y, u, c);
  }
  return Image(slab.width(), slab.height(), channels, std::move(out));
}

Image refocus(const LightFieldSlab& slab, double slope, int threads) {
  if (!std::isfinite(slope)) fail(ErrorCode::kInvalidInput, "refocus slope must be finite");
  return integrate_slab(slab, slope, threads);
}

double slope_for_depth(const LightFieldSlab& slab, double depth_m) {
  const LayerPlan& plan = slab.meta().plan;
  const LensGeometry geom{plan.focal_length_m, plan.reference_depth_m};
  return plan.aperture_scale * std::tan(projection_angle(depth_m, geom));
}

RefocusResult refocus_at_point(const LightFieldSlab& slab, const FocusMap& focus,
                               const DepthMap& depth, double focal_length_m,
                               double aperture_scale, int x, int y, int threads) {
  if (!focus.labels().contains(x, y))
    fail(ErrorCode::kInvalidInput, "click (" + std::to_string(x) + "," + std::to_string(y) +
                                       ") is outside the image");
  RefocusResult r;
  r.label = focus(x, y);
  r.depth_m = depth.label_depths()[r.label - 1];
  const LayerPlan plan = slopes_from_depths(depth.label_depths(), focal_length_m, aperture_scale);
  r.slope = plan.slope_of(r.label);
  r.image = refocus(slab, r.slope, threads);
  return r;
}

std::vector<int> sweep_positions(int u_min, int u_max, int frames) {
  if (frames < 1) fail(ErrorCode::kInvalidInput, "a sweep needs at least one frame");
  std::vector<int> out;
  for (int i = 0; i < frames; ++i) {
    const double t = frames == 1 ? 0.0 : static_cast<double>(i) / (frames - 1);
    const int u = static_cast<int>(std::floor(u_min + t * (u_max - u_min) + 0.5));
    if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
  }
  return out;
}

std::vector<SweepFrame> perspective_sweep(const LightFieldSlab& slab, int u_min, int u_max,
                                          int frames) {
  std::vector<SweepFrame> out;
  for (int u : sweep_positions(u_min, u_max, frames)) out.push_back({u, view_at(slab, u)});
  return out;
}

}  // namespace lumistack
