// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/tomography.hpp"

#include <algorithm>
#include <map>

#include "lumistack/optics.hpp"
#include "lumistack/parallel.hpp"

namespace lumistack {

int LayerPlan::entry_of(int label) const {
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& ls = entries[e].labels;
    if (std::find(ls.begin(), ls.end(), label) != ls.end()) return static_cast<int>(e);
  }
  fail(ErrorCode::kInvalidInput, "label " + std::to_string(label) + " is not in the layer plan");
}

int LayerPlan::label_count() const {
  int n = 0;
  for (const auto& e : entries) n += static_cast<int>(e.labels.size());
  return n;
}

LayerPlan slopes_from_depths(std::span<const double> label_depths, double focal_length_m,
                             double aperture_scale) {
  if (label_depths.empty()) fail(ErrorCode::kInvalidInput, "no label depths");
  if (!std::isfinite(aperture_scale) || aperture_scale <= 0.0)
    fail(ErrorCode::kInvalidInput, "aperture scale must be positive");
  for (double d : label_depths) {
    if (!std::isfinite(d) || d <= 0.0) fail(ErrorCode::kInvalidInput, "label depths must be positive");
  }

  std::map<double, std::vector<int>, std::greater<>> by_depth;
  for (std::size_t i = 0; i < label_depths.size(); ++i)
    by_depth[label_depths[i]].push_back(static_cast<int>(i) + 1);

  LayerPlan plan;
  plan.reference_depth_m = by_depth.begin()->first;
  plan.focal_length_m = focal_length_m;
  plan.aperture_scale = aperture_scale;
  const LensGeometry geom{focal_length_m, plan.reference_depth_m};
  for (auto& [depth, labels] : by_depth) {
    const double slope = aperture_scale * std::tan(projection_angle(depth, geom));
    plan.entries.push_back({std::move(labels), slope, depth});
  }
  plan.entries.front().slope = 0.0;
  return plan;
}

double aperture_scale_for_parallax(std::span<const double> label_depths,
                                   double focal_length_m, double max_parallax_px,
                                   int u_samples) {
  if (!(max_parallax_px > 0.0)) fail(ErrorCode::kInvalidInput, "parallax must be positive");
  if (label_depths.empty()) fail(ErrorCode::kInvalidInput, "no label depths");
  const auto [lo, hi] = std::minmax_element(label_depths.begin(), label_depths.end());
  if (u_samples <= 1 || *lo == *hi) return 1.0;
  const double tan_near = std::tan(projection_angle(*lo, LensGeometry{focal_length_m, *hi}));
  if (tan_near == 0.0) return 1.0;
  return max_parallax_px / (std::abs(tan_near) * (u_samples - 1));
}

namespace {

void check_u_samples(int u_samples) {
  if (u_samples < 1 || u_samples % 2 == 0)
    fail(ErrorCode::kInvalidInput, "u sample count must be odd and positive");
}

}  // namespace

EpipolarImage::EpipolarImage(int width, int u_samples, int channels)
    : width_(width), u_samples_(u_samples), channels_(channels) {
  check_u_samples(u_samples);
  if (width < 1 || channels < 1) fail(ErrorCode::kInvalidInput, "epipolar image must be non-empty");
  data_.assign(static_cast<std::size_t>(width) * u_samples * channels, 0.0f);
  writer_.assign(static_cast<std::size_t>(width) * u_samples, -1);
}

bool EpipolarImage::fully_written() const {
  return std::none_of(writer_.begin(), writer_.end(), [](int w) { return w < 0; });
}

EpipolarImage backproject_row(std::span<const std::span<const float>> rows,
                              std::span<const int> labels, const LayerPlan& plan,
                              int u_samples, int channels) {
  if (plan.entries.empty()) fail(ErrorCode::kInvalidInput, "empty layer plan");
  const int width = static_cast<int>(labels.size());
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  if (static_cast<int>(rows.size()) != plan.label_count())
    fail(ErrorCode::kInvalidInput, "one image row per label is required");
  for (const auto& r : rows) {
    if (r.size() != stride) fail(ErrorCode::kInvalidInput, "image row and mask row lengths differ");
  }
  for (int l : labels) {
    if (l < 1 || l > static_cast<int>(rows.size()))
      fail(ErrorCode::kInvalidInput, "focus label out of range");
  }

  EpipolarImage epi(width, u_samples, channels);
  const int half = epi.half_aperture();
  auto paint = [&](int entry, int label, bool everywhere) {
    const auto src = rows[label - 1];
    const double slope = plan.entries[entry].slope;
    for (int u = -half; u <= half; ++u) {
      const int shift = splat_offset(slope, u);
      const int x_begin = std::max(0, -shift);
      const int x_end = std::min(width, width - shift);
      for (int x0 = x_begin; x0 < x_end; ++x0) {
        if (!everywhere && labels[x0] != label) continue;
        const std::size_t cell = epi.index(x0 + shift, u);
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(x0) * channels, channels,
                    epi.data_.begin() + static_cast<std::ptrdiff_t>(cell) * channels);
        epi.writer_[cell] = entry;
      }
    }
  };

  for (std::size_t e = 0; e < plan.entries.size(); ++e) {
    const auto& entry = plan.entries[e];
    for (std::size_t i = 0; i < entry.labels.size(); ++i) {
      // The background's own image fills the whole slice.
      const bool everywhere = e == 0 && i == 0;
      paint(static_cast<int>(e), entry.labels[i], everywhere);
    }
  }
  return epi;
}

std::vector<float> forward_project(const EpipolarView& epi, double slope) {
  const int w = epi.width;
  const int c_count = epi.channels;
  const int half = (epi.u_samples - 1) / 2;
  std::vector<float> out(static_cast<std::size_t>(w) * c_count);
  std::vector<double> acc(c_count);

  auto sample = [&](double p, int ui) {
    const int x0 = static_cast<int>(std::floor(p));
    const double f = p - x0;
    for (int c = 0; c < c_count; ++c) {
      double v = epi.at(x0, ui, c);
      if (f > 0.0) v = v * (1.0 - f) + epi.at(x0 + 1, ui, c) * f;
      acc[c] += v;
    }
  };

  for (int x = 0; x < w; ++x) {
    std::fill(acc.begin(), acc.end(), 0.0);
    int n = 0;
    for (int ui = 0; ui < epi.u_samples; ++ui) {
      const double p = x + slope * (ui - half);
      if (p < 0.0 || p > w - 1) continue;
      sample(p, ui);
      ++n;
    }
    if (n == 0) {
      for (int ui = 0; ui < epi.u_samples; ++ui)
        sample(std::clamp(x + slope * (ui - half), 0.0, static_cast<double>(w - 1)), ui);
      n = epi.u_samples;
    }
    for (int c = 0; c < c_count; ++c)
      out[static_cast<std::size_t>(x) * c_count + c] =
          static_cast<float>(std::clamp(acc[c] / n, 0.0, 1.0));
  }
  return out;
}

LightFieldSlab::LightFieldSlab(int width, int height, int u_samples, int channels, SlabMeta meta)
    : LightFieldSlab(width, height, u_samples, channels, std::move(meta),
                     std::vector<float>(static_cast<std::size_t>(std::max(width, 0)) *
                                        std::max(height, 0) * std::max(u_samples, 0) *
                                        std::max(channels, 0))) {}

LightFieldSlab::LightFieldSlab(int width, int height, int u_samples, int channels, SlabMeta meta,
                               std::vector<float> data)
    : width_(width), height_(height), u_samples_(u_samples), channels_(channels),
      meta_(std::move(meta)), data_(std::move(data)) {
  check_u_samples(u_samples);
  if (width < 1 || height < 1) fail(ErrorCode::kInvalidInput, "slab dimensions must be positive");
  if (channels != 1 && channels != 3) fail(ErrorCode::kInvalidInput, "slab must have 1 or 3 channels");
  if (data_.size() != static_cast<std::size_t>(height) * row_stride())
    fail(ErrorCode::kInvalidInput, "slab data length does not match dimensions");
}

std::span<float> LightFieldSlab::mutable_row(int y) {
  return std::span<float>(data_).subspan(static_cast<std::size_t>(y) * row_stride(), row_stride());
}

std::span<const float> LightFieldSlab::row_span(int y) const {
  return std::span<const float>(data_).subspan(static_cast<std::size_t>(y) * row_stride(),
                                               row_stride());
}

LightFieldSlab reconstruct_slab(const FocalStack& stack, const FocusMap& focus,
                                const DepthMap& depth, const ReconstructOptions& options) {
  check_u_samples(options.u_samples);
  if (focus.width() != stack.width() || focus.height() != stack.height() ||
      depth.width() != stack.width() || depth.height() != stack.height())
    fail(ErrorCode::kInvalidInput, "focus/depth map size does not match the stack");
  if (focus.label_count() != stack.size() ||
      static_cast<int>(depth.label_depths().size()) != stack.size())
    fail(ErrorCode::kInvalidInput, "label count does not match the stack size");

  SlabMeta meta{slopes_from_depths(depth.label_depths(), options.focal_length_m,
                                   options.aperture_scale),
                std::vector<double>(depth.label_depths().begin(), depth.label_depths().end())};
  LightFieldSlab slab(stack.width(), stack.height(), options.u_samples, stack.channels(),
                      std::move(meta));
  const LayerPlan& plan = slab.meta().plan;

  parallel_for(stack.height(), options.threads, [&](int y) {
    std::vector<std::span<const float>> rows;
    rows.reserve(stack.size());
    for (const auto& img : stack.images()) rows.push_back(img.row(y));
    const EpipolarImage epi =
        backproject_row(rows, focus.labels().row(y), plan, options.u_samples, stack.channels());
    std::copy(epi.data().begin(), epi.data().end(), slab.mutable_row(y).begin());
  });
  return slab;
}

Image integrate_slab(const LightFieldSlab& slab, double slope, int threads) {
  const std::size_t stride = static_cast<std::size_t>(slab.width()) * slab.channels();
  std::vector<float> out(stride * slab.height());
  parallel_for(slab.height(), threads, [&](int y) {
    const auto row = forward_project(slab.row(y), slope);
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(y * stride));
  });
  return Image(slab.width(), slab.height(), slab.channels(), std::move(out));
}

void SyntheticScene::validate() const {
  if (plan.entries.empty()) fail(ErrorCode::kInvalidInput, "scene has no layers");
  if (textures.size() != plan.entries.size() || supports.size() != plan.entries.size())
    fail(ErrorCode::kInvalidInput, "scene needs one texture and support per layer");
  for (std::size_t i = 0; i < textures.size(); ++i) {
    if (!textures[i].same_shape(textures.front()))
      fail(ErrorCode::kInvalidInput, "scene textures differ in shape");
    if (supports[i].width() != textures[i].width() || supports[i].height() != textures[i].height())
      fail(ErrorCode::kInvalidInput, "scene support size does not match its texture");
  }
  for (auto v : supports.front().data()) {
    if (!v) fail(ErrorCode::kInvalidInput, "background support must cover the frame");
  }
}

LightFieldSlab render_scene_light_field(const SyntheticScene& scene, int u_samples, int threads) {
  scene.validate();
  check_u_samples(u_samples);
  const Image& first = scene.textures.front();
  const int w = first.width();
  const int h = first.height();
  const int channels = first.channels();
  std::vector<double> depths(scene.plan.label_count());
  for (const auto& e : scene.plan.entries)
    for (int l : e.labels) depths.at(l - 1) = e.depth_m;
  LightFieldSlab slab(w, h, u_samples, channels, SlabMeta{scene.plan, depths});
  const int half = slab.half_aperture();
  const int layers = static_cast<int>(scene.plan.entries.size());

  parallel_for(h, threads, [&](int y) {
    auto dst = slab.mutable_row(y);
    for (int u = -half; u <= half; ++u) {
      for (int x = 0; x < w; ++x) {
        for (int e = layers - 1; e >= 0; --e) {
          const int x0 = x - splat_offset(scene.plan.entries[e].slope, u);
          if (x0 < 0 || x0 >= w || !scene.supports[e](x0, y)) continue;
          for (int c = 0; c < channels; ++c)
            dst[(static_cast<std::size_t>(u + half) * w + x) * channels + c] =
                scene.textures[e].at(x0, y, c);
          break;
        }
      }
    }
  });
  return slab;
}

FocalStack synthesize_stack(const SyntheticScene& scene, int u_samples, int threads) {
  const LightFieldSlab truth = render_scene_light_field(scene, u_samples, threads);
  std::vector<Image> images;
  std::vector<CaptureMeta> meta;
  for (int label = 1; label <= scene.plan.label_count(); ++label) {
    const auto& entry = scene.plan.entries[scene.plan.entry_of(label)];
    images.push_back(integrate_slab(truth, entry.slope, threads));
    CaptureMeta m;
    m.focus_distance_m = entry.depth_m;
    m.focal_length_m = scene.plan.focal_length_m;
    meta.push_back(m);
  }
  return FocalStack(std::move(images), std::move(meta));
}

}  // namespace lumistack
