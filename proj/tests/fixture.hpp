// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors
//
// Writes a synthetic focal stack, manifests and the calibration table to disk.

#pragma once

#include <string>

#include "json.hpp"
#include "lumistack/io.hpp"
#include "support.hpp"

namespace lumistack::testing {

inline constexpr const char* kTable1Csv =
    "focus_param,near_m,far_m\n"
    "0,0.24,0.25\n"
    "-500,0.27,0.28\n"
    "-1000,0.30,0.32\n"
    "-1500,0.35,0.37\n"
    "-2000,0.41,0.43\n"
    "-2500,0.49,0.51\n"
    "-3000,0.60,0.63\n"
    "-3500,0.79,0.82\n"
    "-4000,1.20,1.27\n"
    "-4500,2.0,2.7\n"
    "-5000,15,25\n";

struct DiskScene {
  SyntheticScene scene;
  FocalStack stack;  // as decoded back from the PNGs
  std::filesystem::path manifest;        // metric focus distances
  std::filesystem::path param_manifest;  // focus parameters + calibration table
  std::filesystem::path table;
  int u_samples;
};

/// Band scene written as 8-bit PNGs. The stack is re-read from disk so
/// in-memory comparisons see the same quantized data as the CLI.
inline DiskScene write_disk_scene(const std::filesystem::path& dir, int w, int h, int u_samples) {
  DiskScene d{band_scene(w, h, 3), {}, dir / "stack.json", dir / "stack_params.json",
              dir / "table1.csv", u_samples};
  const FocalStack synth = synthesize_stack(d.scene, u_samples);
  nlohmann::json images = nlohmann::json::array();
  nlohmann::json param_images = nlohmann::json::array();
  const double params[] = {-5000.0, -2500.0, 0.0};
  for (int k = 0; k < synth.size(); ++k) {
    const std::string name = "img_" + std::to_string(k + 1) + ".png";
    write_file_atomic(dir / name, encode_png(synth.image(k)));
    images.push_back({{"path", name}, {"focus_distance_m", *synth.meta(k).focus_distance_m}});
    param_images.push_back({{"path", name}, {"focus_param", params[k]}});
  }
  const nlohmann::json p{{"M", 5}, {"lambda", 1.0}, {"median_radius", 2},
                         {"u_samples", u_samples}, {"aperture_scale", kApertureScale}};
  spit(d.manifest, nlohmann::json{{"focal_length_mm", kFocal * 1000.0},
                                  {"images", images}, {"params", p}}
                       .dump(2));
  spit(d.table, kTable1Csv);
  spit(d.param_manifest, nlohmann::json{{"focal_length_mm", kFocal * 1000.0},
                                        {"calibration", "table1.csv"},
                                        {"images", param_images},
                                        {"params", p}}
                             .dump(2));
  d.stack = load_stack(load_manifest(d.manifest));
  return d;
}

}  // namespace lumistack::testing
