// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/optics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lumistack {

void CalibrationTable::validate() const {
  if (rows.size() < 2) fail(ErrorCode::kCalibration, "calibration needs at least two rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!std::isfinite(r.focus_param) || !std::isfinite(r.near_m) || !std::isfinite(r.far_m))
      fail(ErrorCode::kCalibration, "calibration row " + std::to_string(i + 1) + " is not finite");
    if (!(r.near_m > 0.0) || !(r.near_m < r.far_m))
      fail(ErrorCode::kCalibration,
           "calibration row " + std::to_string(i + 1) + " needs 0 < near < far");
  }
  const bool increasing = rows[1].focus_param > rows[0].focus_param;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double step = rows[i].focus_param - rows[i - 1].focus_param;
    if (step == 0.0 || (step > 0.0) != increasing)
      fail(ErrorCode::kCalibration, "focus parameters are not strictly monotone at row " +
                                        std::to_string(i + 1));
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(t, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == t.size();
}

}  // namespace

CalibrationTable parse_calibration_csv(const std::string& text) {
  CalibrationTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    CalibrationRow row{};
    const bool numeric = fields.size() == 3 && parse_number(fields[0], row.focus_param) &&
                         parse_number(fields[1], row.near_m) &&
                         parse_number(fields[2], row.far_m);
    if (!numeric) {
      if (!seen_content) {
        seen_content = true;
        continue;
      }
      fail(ErrorCode::kFormat, "calibration line " + std::to_string(line_no) +
                                   ": expected focus_param,near_m,far_m");
    }
    seen_content = true;
    table.rows.push_back(row);
  }
  return table;
}

CalibrationModel fit_focus_curve(const CalibrationTable& table, const FitOptions& options) {
  table.validate();
  if (!std::isfinite(options.last_row_weight) || options.last_row_weight <= 0.0)
    fail(ErrorCode::kCalibration, "last row weight must be positive");

  const std::size_t n = table.rows.size();
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = table.rows[i];
    const double mid = r.midpoint();
    const double y = 1.0 / mid;
    double w = mid * mid;
    if (i + 1 == n) w *= options.last_row_weight;
    sw += w;
    sx += w * r.focus_param;
    sy += w * y;
    sxx += w * r.focus_param * r.focus_param;
    sxy += w * r.focus_param * y;
  }
  const double denom = sw * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) fail(ErrorCode::kCalibration, "degenerate calibration fit");

  CalibrationModel model;
  model.slope = (sw * sxy - sx * sy) / denom;
  model.intercept = (sy - model.slope * sx) / sw;
  model.param_min = std::min(table.rows.front().focus_param, table.rows.back().focus_param);
  model.param_max = std::max(table.rows.front().focus_param, table.rows.back().focus_param);

  const double at_min = model.slope * model.param_min + model.intercept;
  const double at_max = model.slope * model.param_max + model.intercept;
  if (model.slope == 0.0 || !(at_min > 0.0) || !(at_max > 0.0))
    fail(ErrorCode::kCalibration,
         "fitted focus curve is not positive and monotone over the calibrated range");

  double mean_y = 0.0;
  for (const auto& r : table.rows) mean_y += 1.0 / r.midpoint();
  mean_y /= static_cast<double>(n);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& r : table.rows) {
    const double y = 1.0 / r.midpoint();
    const double pred = model.slope * r.focus_param + model.intercept;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - mean_y) * (y - mean_y);
    model.rows.push_back({r.focus_param, r.midpoint(), 1.0 / pred});
  }
  model.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return model;
}

double focus_param_to_depth(const CalibrationModel& model, double focus_param, bool* clamped) {
  if (!std::isfinite(focus_param)) fail(ErrorCode::kCalibration, "focus parameter is not finite");
  const double f = std::clamp(focus_param, model.param_min, model.param_max);
  if (clamped) *clamped = f != focus_param;
  const double inv = model.slope * f + model.intercept;
  if (!(inv > 0.0)) fail(ErrorCode::kCalibration, "focus parameter maps outside the calibrated range");
  return 1.0 / inv;
}

void LensGeometry::validate() const {
  if (!(focal_length_m > 0.0) || !std::isfinite(focal_length_m))
    fail(ErrorCode::kInvalidInput, "focal length must be positive");
  if (!(reference_distance_m > focal_length_m))
    fail(ErrorCode::kInvalidInput, "reference distance must exceed the focal length");
}

double thin_lens_image_distance(double focal_length_m, double object_distance_m) {
  if (!(focal_length_m > 0.0)) fail(ErrorCode::kInvalidInput, "focal length must be positive");
  if (!(object_distance_m > focal_length_m))
    fail(ErrorCode::kNoRealImage, "object inside the focal length forms no real image");
  return 1.0 / (1.0 / focal_length_m - 1.0 / object_distance_m);
}

double projection_angle(double distance_m, const LensGeometry& geom) {
  geom.validate();
  if (!(distance_m > geom.focal_length_m))
    fail(ErrorCode::kNoRealImage, "distance must exceed the focal length");
  const double num = 1.0 / geom.reference_distance_m - 1.0 / distance_m;
  const double den = 1.0 / geom.focal_length_m - 1.0 / geom.reference_distance_m;
  if (!(den > 0.0)) fail(ErrorCode::kInvalidInput, "degenerate lens geometry");
  return std::atan(num / den);
}

double refocus_resolution(double spatial_res, double angular_res, double alpha) {
  if (!(spatial_res > 0.0) || !(angular_res > 0.0))
    fail(ErrorCode::kInvalidInput, "resolutions must be positive");
  if (!(alpha > 0.0) || alpha > 1.0)
    fail(ErrorCode::kInvalidInput, "refocus parameter must lie in (0, 1]");
  const double boundary = spatial_res / (spatial_res + angular_res);
  if (alpha >= boundary) {
    const double r = (1.0 - alpha) / alpha;
    return spatial_res * std::sqrt(1.0 + r * r);
  }
  const double r = alpha / (1.0 - alpha);
  return angular_res * std::sqrt(1.0 + r * r);
}

std::vector<double> label_depths(std::span<const CaptureMeta> meta,
                                 const CalibrationModel* model) {
  std::vector<double> out;
  out.reserve(meta.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    if (meta[i].focus_distance_m) {
      out.push_back(*meta[i].focus_distance_m);
    } else if (meta[i].focus_param && model) {
      out.push_back(focus_param_to_depth(*model, *meta[i].focus_param));
    } else {
      missing.push_back(i + 1);
      out.push_back(0.0);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (auto i : missing) list += (list.empty() ? "" : ", ") + std::to_string(i);
    fail(ErrorCode::kCalibration, "no depth for stack image(s) " + list +
                                      ": focus parameter given but no calibration model");
  }
  return out;
}

DepthMap focus_map_to_depth_map(const FocusMap& focus, std::span<const CaptureMeta> meta,
                                const CalibrationModel* model) {
  if (static_cast<int>(meta.size()) != focus.label_count())
    fail(ErrorCode::kInvalidInput, "one metadata record per label is required");
  return DepthMap(focus, label_depths(meta, model));
}

}  // namespace lumistack
