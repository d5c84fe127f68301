// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lumistack {

enum class ErrorCode {
  kInvalidInput = 1,
  kCalibration,
  kNoRealImage,
  kIo,
  kFormat,
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

/// Dense row-major 2D container.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(checked_size(width, height), fill) {}
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height))
      fail(ErrorCode::kInvalidInput, "grid data length does not match dimensions");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  std::span<T> row(int y) {
    return std::span<T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }
  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }
  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  static std::size_t checked_size(int width, int height) {
    if (width < 0 || height < 0)
      fail(ErrorCode::kInvalidInput, "negative grid dimensions");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ScalarField = Grid<double>;
using Mask = Grid<std::uint8_t>;

/// Normalized image, intensities in [0,1], interleaved row-major.
/// Immutable once constructed.
class Image {
 public:
  Image() = default;
  /// Validates dimensions, channel count (1 or 3) and that every sample is a
  /// finite value in [0,1].
  Image(int width, int height, int channels, std::vector<float> data);
  /// Constant-valued image.
  static Image filled(int width, int height, int channels, float value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  /// One scanline, width * channels samples.
  std::span<const float> row(int y) const {
    const std::size_t stride = static_cast<std::size_t>(width_) * channels_;
    return std::span<const float>(data_).subspan(y * stride, stride);
  }
  std::span<const float> data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }
  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Rec. 709 luma; identity for single-channel input.
Image to_luma(const Image& img);

struct CaptureMeta {
  std::optional<double> focus_param;
  std::optional<double> focus_distance_m;
  double focal_length_m = 0.0;

  void validate() const;
};

class FocalStack {
 public:
  FocalStack() = default;
  FocalStack(std::vector<Image> images, std::vector<CaptureMeta> meta);

  int size() const noexcept { return static_cast<int>(images_.size()); }
  int width() const noexcept { return images_.front().width(); }
  int height() const noexcept { return images_.front().height(); }
  int channels() const noexcept { return images_.front().channels(); }
  /// Zero-based index.
  const Image& image(int index) const { return images_.at(index); }
  const CaptureMeta& meta(int index) const { return meta_.at(index); }
  std::span<const Image> images() const noexcept { return images_; }
  std::span<const CaptureMeta> metas() const noexcept { return meta_; }

 private:
  std::vector<Image> images_;
  std::vector<CaptureMeta> meta_;
};

/// Per-pixel index (1..K) of the stack image in which the pixel is in focus.
class FocusMap {
 public:
  FocusMap() = default;
  FocusMap(Grid<int> labels, int label_count);
  static FocusMap constant(int width, int height, int label_count, int label);

  int width() const noexcept { return labels_.width(); }
  int height() const noexcept { return labels_.height(); }
  int label_count() const noexcept { return label_count_; }
  int operator()(int x, int y) const { return labels_(x, y); }
  const Grid<int>& labels() const noexcept { return labels_; }

  bool operator==(const FocusMap&) const = default;

 private:
  Grid<int> labels_;
  int label_count_ = 0;
};

/// Metric depth per pixel, quantized to one calibrated distance per label.
class DepthMap {
 public:
  DepthMap() = default;
  /// label_depths[k-1] is the depth of stack image k.
  DepthMap(const FocusMap& focus, std::vector<double> label_depths);

  int width() const noexcept { return depth_.width(); }
  int height() const noexcept { return depth_.height(); }
  double operator()(int x, int y) const { return depth_(x, y); }
  const ScalarField& depths() const noexcept { return depth_; }
  /// One entry per label; index 0 is label 1.
  std::span<const double> label_depths() const noexcept { return label_depths_; }

 private:
  ScalarField depth_;
  std::vector<double> label_depths_;
};

}  // namespace lumistack
