// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/core.hpp"

#include <algorithm>
#include <cmath>

namespace lumistack {

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

Image::Image(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width <= 0 || height <= 0)
    fail(ErrorCode::kInvalidInput, "image dimensions must be positive");
  if (channels != 1 && channels != 3)
    fail(ErrorCode::kInvalidInput, "image must have 1 or 3 channels");
  if (data_.size() != static_cast<std::size_t>(width) * height * channels)
    fail(ErrorCode::kInvalidInput, "image data length does not match dimensions");
  for (float v : data_) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
      fail(ErrorCode::kInvalidInput, "image intensity outside [0,1]");
  }
}

Image Image::filled(int width, int height, int channels, float value) {
  std::vector<float> data(static_cast<std::size_t>(std::max(width, 0)) *
                              std::max(height, 0) * std::max(channels, 0),
                          value);
  return Image(width, height, channels, std::move(data));
}

Image to_luma(const Image& img) {
  if (img.channels() == 1) return img;
  const auto src = img.data();
  std::vector<float> out(static_cast<std::size_t>(img.width()) * img.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double luma = 0.2126 * src[3 * i] + 0.7152 * src[3 * i + 1] +
                        0.0722 * src[3 * i + 2];
    out[i] = static_cast<float>(std::clamp(luma, 0.0, 1.0));
  }
  return Image(img.width(), img.height(), 1, std::move(out));
}

void CaptureMeta::validate() const {
  if (!focus_param && !focus_distance_m)
    fail(ErrorCode::kInvalidInput, "capture metadata needs a focus parameter or a focus distance");
  if (!(focal_length_m > 0.0) || !std::isfinite(focal_length_m))
    fail(ErrorCode::kInvalidInput, "focal length must be positive");
  if (focus_distance_m &&
      (!std::isfinite(*focus_distance_m) || *focus_distance_m <= focal_length_m))
    fail(ErrorCode::kInvalidInput, "focus distance must exceed the focal length");
  if (focus_param && !std::isfinite(*focus_param))
    fail(ErrorCode::kInvalidInput, "focus parameter must be finite");
}

FocalStack::FocalStack(std::vector<Image> images, std::vector<CaptureMeta> meta)
    : images_(std::move(images)), meta_(std::move(meta)) {
  if (images_.empty()) fail(ErrorCode::kInvalidInput, "focal stack is empty");
  if (images_.size() != meta_.size())
    fail(ErrorCode::kInvalidInput, "focal stack needs exactly one metadata record per image");
  for (const auto& img : images_) {
    if (img.empty() || !img.same_shape(images_.front()))
      fail(ErrorCode::kInvalidInput, "focal stack images differ in size or channel count");
  }
  for (const auto& m : meta_) m.validate();
}

FocusMap::FocusMap(Grid<int> labels, int label_count)
    : labels_(std::move(labels)), label_count_(label_count) {
  if (label_count < 1) fail(ErrorCode::kInvalidInput, "focus map needs at least one label");
  for (int l : labels_.data()) {
    if (l < 1 || l > label_count)
      fail(ErrorCode::kInvalidInput, "focus map label out of range");
  }
}

FocusMap FocusMap::constant(int width, int height, int label_count, int label) {
  return FocusMap(Grid<int>(width, height, label), label_count);
}

DepthMap::DepthMap(const FocusMap& focus, std::vector<double> label_depths)
    : depth_(focus.width(), focus.height()), label_depths_(std::move(label_depths)) {
  if (static_cast<int>(label_depths_.size()) != focus.label_count())
    fail(ErrorCode::kInvalidInput, "depth map needs one depth per label");
  for (double d : label_depths_) {
    if (!std::isfinite(d) || d <= 0.0)
      fail(ErrorCode::kInvalidInput, "label depths must be positive and finite");
  }
  for (int y = 0; y < focus.height(); ++y)
    for (int x = 0; x < focus.width(); ++x)
      depth_(x, y) = label_depths_[focus(x, y) - 1];
}

}  // namespace lumistack
