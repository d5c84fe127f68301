// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lumistack/core.hpp"

namespace lumistack {

struct CalibrationRow {
  double focus_param;
  double near_m;
  double far_m;
  double midpoint() const noexcept { return 0.5 * (near_m + far_m); }
};

/// Measured in-focus distance interval per camera focus parameter.
struct CalibrationTable {
  std::vector<CalibrationRow> rows;

  void validate() const;
};

/// Parses `focus_param,near_m,far_m` lines. A non-numeric first line is taken
/// as a header; blank lines and lines starting with '#' are skipped. Errors
/// carry the 1-based line number.
CalibrationTable parse_calibration_csv(const std::string& text);

struct FitOptions {
  /// Relative weight of the final table row, whose interval is usually the
  /// widest and least certain.
  double last_row_weight = 0.25;
};

struct RowFit {
  double focus_param;
  double midpoint_m;
  double predicted_m;
};

/// 1/D = slope * F + intercept over the fitted focus parameter range.
struct CalibrationModel {
  double slope = 0.0;
  double intercept = 0.0;
  double param_min = 0.0;
  double param_max = 0.0;
  /// Coefficient of determination of the fit on the 1/D axis.
  double r_squared = 0.0;
  std::vector<RowFit> rows;
};

/// Weighted least squares of 1/midpoint against the focus parameter. Residuals
/// are weighted by midpoint^2 so each row contributes its relative distance
/// error.
CalibrationModel fit_focus_curve(const CalibrationTable& table, const FitOptions& options = {});

/// D = 1 / (slope * F + intercept). F outside the fitted range is clamped and
/// reported through `clamped`.
double focus_param_to_depth(const CalibrationModel& model, double focus_param,
                            bool* clamped = nullptr);

struct LensGeometry {
  double focal_length_m;
  double reference_distance_m;

  void validate() const;
};

/// Conjugate image distance of an object at `object_distance_m` (positive).
double thin_lens_image_distance(double focal_length_m, double object_distance_m);

/// Back-projection angle of a plane at `distance_m` relative to the reference
/// plane. Positive beyond the reference plane, negative in front of it.
double projection_angle(double distance_m, const LensGeometry& geom);

/// Spatial resolution of a photograph refocused with parameter alpha from a
/// plenoptic capture with the given spatial and angular resolutions.
double refocus_resolution(double spatial_res, double angular_res, double alpha);

/// Depth per stack image, from the metadata distance when present, otherwise
/// from the focus parameter through `model`.
std::vector<double> label_depths(std::span<const CaptureMeta> meta,
                                 const CalibrationModel* model);

DepthMap focus_map_to_depth_map(const FocusMap& focus, std::span<const CaptureMeta> meta,
                                const CalibrationModel* model);

}  // namespace lumistack
