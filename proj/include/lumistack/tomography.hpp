// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lumistack/core.hpp"

namespace lumistack {

/// Integer x-offset of a line with the given slope at view u (nearest pixel,
/// halves rounded up).
inline int splat_offset(double slope, int u) {
  return static_cast<int>(std::floor(slope * u + 0.5));
}

struct LayerEntry {
  /// Labels (1..K) sharing this depth, ascending.
  std::vector<int> labels;
  /// x-shift in pixels per unit u.
  double slope = 0.0;
  double depth_m = 0.0;
};

/// Layers ordered farthest first; the first entry is the background and
/// defines the reference plane (slope 0).
struct LayerPlan {
  std::vector<LayerEntry> entries;
  double reference_depth_m = 0.0;
  double focal_length_m = 0.0;
  double aperture_scale = 1.0;

  int reference_label() const { return entries.front().labels.front(); }
  /// Index into `entries` of the layer holding `label`.
  int entry_of(int label) const;
  double slope_of(int label) const { return entries[entry_of(label)].slope; }
  int label_count() const;
};

/// Groups equal depths, orders them farthest first and assigns each the slope
/// aperture_scale * tan(theta) with the farthest depth as reference.
LayerPlan slopes_from_depths(std::span<const double> label_depths, double focal_length_m,
                             double aperture_scale);

/// Aperture scale giving the nearest layer a total parallax of
/// `max_parallax_px` across all u samples. 1 when there is no parallax.
double aperture_scale_for_parallax(std::span<const double> label_depths,
                                   double focal_length_m, double max_parallax_px,
                                   int u_samples);

/// Read-only (x,u) slice. Samples are stored u-major, then x, then channel;
/// u_index 0 is u = -(U-1)/2.
struct EpipolarView {
  int width = 0;
  int u_samples = 0;
  int channels = 0;
  std::span<const float> data;

  float at(int x, int u_index, int c) const {
    return data[(static_cast<std::size_t>(u_index) * width + x) * channels + c];
  }
};

class EpipolarImage {
 public:
  EpipolarImage(int width, int u_samples, int channels);

  int width() const noexcept { return width_; }
  int u_samples() const noexcept { return u_samples_; }
  int channels() const noexcept { return channels_; }
  int half_aperture() const noexcept { return (u_samples_ - 1) / 2; }

  /// u in [-(U-1)/2, (U-1)/2].
  float at(int x, int u, int c = 0) const {
    return data_[index(x, u) * channels_ + c];
  }
  /// Plan entry that last painted the cell, -1 if never written.
  int writer(int x, int u) const { return writer_[index(x, u)]; }
  bool fully_written() const;

  EpipolarView view() const { return {width_, u_samples_, channels_, data_}; }
  std::span<const float> data() const noexcept { return data_; }

 private:
  friend EpipolarImage backproject_row(std::span<const std::span<const float>>,
                                       std::span<const int>, const LayerPlan&, int, int);
  std::size_t index(int x, int u) const {
    return static_cast<std::size_t>(u + half_aperture()) * width_ + x;
  }

  int width_;
  int u_samples_;
  int channels_;
  std::vector<float> data_;
  std::vector<int> writer_;
};

/// Masked back-projection of one scanline. `rows[k-1]` is the scanline of
/// stack image k (width * channels samples) and `labels` the focus-map row.
/// The background layer is painted everywhere, then every nearer layer paints
/// its in-focus pixels along its slope, farthest to nearest, overwriting.
EpipolarImage backproject_row(std::span<const std::span<const float>> rows,
                              std::span<const int> labels, const LayerPlan& plan,
                              int u_samples, int channels);

/// Photograph of one epipolar slice integrated along lines of the given
/// slope: mean over u of E(x + slope*u, u), linear in x. Samples outside the
/// row are dropped; if all are, positions are clamped instead.
std::vector<float> forward_project(const EpipolarView& epi, double slope);

struct SlabMeta {
  LayerPlan plan;
  /// Depth of each label, index 0 is label 1.
  std::vector<double> label_depths;
};

/// LF(x, y, u, 0) stored y-major, then u, then x, then channel.
class LightFieldSlab {
 public:
  LightFieldSlab() = default;
  LightFieldSlab(int width, int height, int u_samples, int channels, SlabMeta meta);
  LightFieldSlab(int width, int height, int u_samples, int channels, SlabMeta meta,
                 std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int u_samples() const noexcept { return u_samples_; }
  int channels() const noexcept { return channels_; }
  int half_aperture() const noexcept { return (u_samples_ - 1) / 2; }
  const SlabMeta& meta() const noexcept { return meta_; }

  float at(int x, int y, int u, int c = 0) const {
    return data_[((static_cast<std::size_t>(y) * u_samples_ + (u + half_aperture())) * width_ +
                  x) * channels_ + c];
  }
  EpipolarView row(int y) const { return {width_, u_samples_, channels_, row_span(y)}; }
  std::span<float> mutable_row(int y);
  std::span<const float> data() const noexcept { return data_; }

 private:
  std::span<const float> row_span(int y) const;
  std::size_t row_stride() const {
    return static_cast<std::size_t>(u_samples_) * width_ * channels_;
  }

  int width_ = 0;
  int height_ = 0;
  int u_samples_ = 0;
  int channels_ = 0;
  SlabMeta meta_;
  std::vector<float> data_;
};

struct ReconstructOptions {
  double focal_length_m = 0.0;
  double aperture_scale = 1.0;
  int u_samples = 33;
  int threads = 1;
};

/// Back-projects every scanline of the stack independently.
LightFieldSlab reconstruct_slab(const FocalStack& stack, const FocusMap& focus,
                                const DepthMap& depth, const ReconstructOptions& options);

/// Integrates every scanline of the slab along `slope`.
Image integrate_slab(const LightFieldSlab& slab, double slope, int threads = 1);

/// Known layered scene: one texture and support mask per plan entry. The
/// first (background) support must cover the frame.
struct SyntheticScene {
  LayerPlan plan;
  std::vector<Image> textures;
  std::vector<Mask> supports;

  void validate() const;
};

/// Ground-truth light field: each cell takes the texture of the nearest layer
/// whose support contains the cell's source pixel.
LightFieldSlab render_scene_light_field(const SyntheticScene& scene, int u_samples,
                                        int threads = 1);

/// One photograph per label, each integrating the ground-truth light field at
/// its layer's slope. Metadata carries the layer depths.
FocalStack synthesize_stack(const SyntheticScene& scene, int u_samples, int threads = 1);

}  // namespace lumistack
