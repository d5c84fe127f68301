// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lumistack/core.hpp"
#include "lumistack/optics.hpp"
#include "lumistack/tomography.hpp"

namespace lumistack {

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so a failed write leaves
/// nothing behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// 8-bit PNG, gray or RGB by channel count. Samples are rounded to the
/// nearest 1/255 step.
std::string encode_png(const Image& img);
/// Any PNG the decoder understands; alpha is dropped, gray stays 1 channel.
Image decode_png(std::string_view bytes);

/// Labels as 8-bit gray (value = label, 0 unused). K must be <= 255.
std::string encode_focus_map_png(const FocusMap& map);
/// label_count 0 takes the largest label present.
FocusMap decode_focus_map_png(std::string_view bytes, int label_count = 0);

/// Millimetres as 16-bit gray, clamped to 65535.
std::string encode_depth_png(const DepthMap& depth);
std::vector<std::uint16_t> decode_depth_png_mm(std::string_view bytes, int* width, int* height);

inline constexpr char kSlabMagic[8] = {'L', 'F', 'S', 'L', 'A', 'B', '1', '\0'};

/// Magic, u32 X Y U channels, f32 samples (y, u, x, c), u32 length and a JSON
/// metadata record; everything little-endian.
std::string encode_slab(const LightFieldSlab& slab);
LightFieldSlab decode_slab(std::string_view bytes);

std::string slab_meta_json(const SlabMeta& meta);
SlabMeta parse_slab_meta_json(std::string_view text);

std::string calibration_model_json(const CalibrationModel& model);
CalibrationModel parse_calibration_model_json(std::string_view text);

struct PipelineParams {
  int score_steps = 5;
  double lambda = 1.0;
  int median_radius = 2;
  int u_samples = 33;
  /// Derived from max_parallax when absent.
  std::optional<double> aperture_scale;
  double max_parallax = 8.0;
  int threads = 1;
};

struct ManifestEntry {
  std::filesystem::path path;
  std::optional<double> focus_param;
  std::optional<double> focus_distance_m;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> images;
  double focal_length_m = 0.0;
  std::optional<std::filesystem::path> calibration_table;
  std::optional<std::filesystem::path> calibration_model;
  PipelineParams params;
};

/// JSON manifest; relative paths resolve against the manifest's directory.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
FocalStack load_stack(const Manifest& manifest);
/// Calibration from the manifest's model or table, if either is given.
std::optional<CalibrationModel> load_calibration(const Manifest& manifest);

}  // namespace lumistack
