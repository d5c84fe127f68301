// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors
//
// Scene builders and independent oracles shared by the test binaries.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lumistack/core.hpp"
#include "lumistack/tomography.hpp"

namespace lumistack::testing {

/// Deterministic value noise in [lo, hi], independent per pixel and channel.
inline float hash_noise(int x, int y, int c, std::uint32_t seed, float lo = 0.1f, float hi = 0.9f) {
  std::uint32_t h = seed * 0x9E3779B1u ^ static_cast<std::uint32_t>(x) * 0x85EBCA77u ^
                    static_cast<std::uint32_t>(y) * 0xC2B2AE3Du ^
                    static_cast<std::uint32_t>(c) * 0x27D4EB2Fu;
  h ^= h >> 15;
  h *= 0x2C1B3C6Du;
  h ^= h >> 12;
  h *= 0x297A2D39u;
  h ^= h >> 15;
  return lo + (hi - lo) * static_cast<float>(h >> 8) / static_cast<float>(1u << 24);
}

inline Image noise_image(int w, int h, int channels, std::uint32_t seed) {
  std::vector<float> data(static_cast<std::size_t>(w) * h * channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        data[(static_cast<std::size_t>(y) * w + x) * channels + c] = hash_noise(x, y, c, seed);
  return Image(w, h, channels, std::move(data));
}

struct Rect {
  int x0, y0, x1, y1;  // half-open
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

inline Mask rect_mask(int w, int h, const std::vector<Rect>& rects) {
  Mask m(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (const auto& r : rects)
        if (r.contains(x, y)) m(x, y) = 1;
  return m;
}

/// Lens set-up whose layer slopes come out as the integers 0, -1, -2 with
/// aperture scale 39: f = 5 cm, depths 2 m, 1 m and 2/3 m.
inline constexpr double kFocal = 0.05;
inline constexpr double kApertureScale = 39.0;
inline const std::vector<double> kBandDepths = {2.0, 1.0, 2.0 / 3.0};

struct SceneLayer {
  double depth_m;
  std::vector<Rect> support;  // empty means full frame
  std::uint32_t seed;
};

inline SyntheticScene make_scene(int w, int h, int channels, const std::vector<SceneLayer>& layers,
                                 double focal = kFocal, double aperture = kApertureScale) {
  std::vector<double> depths;
  for (const auto& l : layers) depths.push_back(l.depth_m);
  SyntheticScene scene;
  scene.plan = slopes_from_depths(depths, focal, aperture);
  for (const auto& entry : scene.plan.entries) {
    const auto& layer = layers[entry.labels.front() - 1];
    scene.textures.push_back(noise_image(w, h, channels, layer.seed));
    scene.supports.push_back(layer.support.empty() ? Mask(w, h, 1)
                                                   : rect_mask(w, h, layer.support));
  }
  return scene;
}

/// First and last rows of the middle band; the near band fills the rest.
inline int band_mid_top(int h) { return h * 5 / 12; }
inline int band_near_top(int h) { return h * 19 / 24; }

/// The acceptance scene: full-width bands at three depths, background on top.
inline SyntheticScene band_scene(int w = 256, int h = 192, int channels = 3) {
  return make_scene(w, h, channels,
                    {{kBandDepths[0], {}, 11},
                     {kBandDepths[1], {{0, band_mid_top(h), w, band_near_top(h)}}, 23},
                     {kBandDepths[2], {{0, band_near_top(h), w, h}}, 37}});
}

/// Push-style painter: walks each layer farthest first and writes every
/// support pixel along its line, later layers overwriting. Independent of the
/// library's pull-style renderer and of backproject_row.
struct Painted {
  int w, h, U, channels;
  std::vector<float> value;  // (y, u, x, c)
  std::vector<int> layer;    // (y, u, x); -1 when nothing landed
  float at(int x, int y, int u, int c = 0) const {
    const int half = (U - 1) / 2;
    return value[((static_cast<std::size_t>(y) * U + (u + half)) * w + x) * channels + c];
  }
  int layer_at(int x, int y, int u) const {
    const int half = (U - 1) / 2;
    return layer[(static_cast<std::size_t>(y) * U + (u + half)) * w + x];
  }
};

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

inline Painted paint(const std::vector<const Image*>& images, const std::vector<const Mask*>& masks,
                     const std::vector<double>& slopes, int U) {
  const int w = images.front()->width();
  const int h = images.front()->height();
  const int ch = images.front()->channels();
  Painted p{w, h, U, ch, std::vector<float>(static_cast<std::size_t>(w) * h * U * ch, 0.0f),
            std::vector<int>(static_cast<std::size_t>(w) * h * U, -1)};
  const int half = (U - 1) / 2;
  for (std::size_t k = 0; k < images.size(); ++k) {
    for (int y = 0; y < h; ++y)
      for (int x0 = 0; x0 < w; ++x0) {
        if (masks[k] && !(*masks[k])(x0, y)) continue;
        for (int u = -half; u <= half; ++u) {
          const int x = x0 + round_half_up(slopes[k] * u);
          if (x < 0 || x >= w) continue;
          const std::size_t cell = (static_cast<std::size_t>(y) * U + (u + half)) * w + x;
          p.layer[cell] = static_cast<int>(k);
          for (int c = 0; c < ch; ++c) p.value[cell * ch + c] = images[k]->at(x0, y, c);
        }
      }
  }
  return p;
}

inline Painted paint_scene(const SyntheticScene& scene, int U) {
  std::vector<const Image*> imgs;
  std::vector<const Mask*> masks;
  std::vector<double> slopes;
  for (std::size_t e = 0; e < scene.plan.entries.size(); ++e) {
    imgs.push_back(&scene.textures[e]);
    masks.push_back(&scene.supports[e]);
    slopes.push_back(scene.plan.entries[e].slope);
  }
  return paint(imgs, masks, slopes, U);
}

/// Label visible at u = 0 for every pixel: the true focus map.
inline Grid<int> true_labels(const SyntheticScene& scene, const Painted& truth) {
  Grid<int> labels(truth.w, truth.h, 0);
  for (int y = 0; y < truth.h; ++y)
    for (int x = 0; x < truth.w; ++x)
      labels(x, y) = scene.plan.entries[truth.layer_at(x, y, 0)].labels.front();
  return labels;
}

/// Pixels of view u that show a scene point seen from every view.
inline Mask unoccluded_in_view(const SyntheticScene& scene, const Painted& truth, int u) {
  Mask m(truth.w, truth.h, 0);
  const int half = (truth.U - 1) / 2;
  for (int y = 0; y < truth.h; ++y)
    for (int x = 0; x < truth.w; ++x) {
      const int e = truth.layer_at(x, y, u);
      if (e < 0) continue;
      const double s = scene.plan.entries[e].slope;
      const int x0 = x - round_half_up(s * u);
      bool ok = true;
      for (int v = -half; v <= half && ok; ++v) {
        const int xv = x0 + round_half_up(s * v);
        ok = xv >= 0 && xv < truth.w && truth.layer_at(xv, y, v) == e;
      }
      m(x, y) = ok ? 1 : 0;
    }
  return m;
}

inline double psnr(double mse) { return mse <= 0.0 ? INFINITY : 10.0 * std::log10(1.0 / mse); }

/// Mean central-difference gradient magnitude over the masked pixels.
inline double mean_gradient(const Image& img, const Mask& mask) {
  double sum = 0.0;
  long n = 0;
  for (int y = 1; y + 1 < img.height(); ++y)
    for (int x = 1; x + 1 < img.width(); ++x) {
      if (!mask(x, y)) continue;
      for (int c = 0; c < img.channels(); ++c) {
        const double gx = 0.5 * (img.at(x + 1, y, c) - img.at(x - 1, y, c));
        const double gy = 0.5 * (img.at(x, y + 1, c) - img.at(x, y - 1, c));
        sum += std::sqrt(gx * gx + gy * gy);
        ++n;
      }
    }
  return n ? sum / n : 0.0;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lumistack-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  f << bytes;
}

}  // namespace lumistack::testing
