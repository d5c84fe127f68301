// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lumistack {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIo, "cannot read " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(ErrorCode::kIo, "cannot write " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot move output into place at " + path.string());
  }
}

namespace {

std::string write_png(png_image& image, const void* buffer, std::ptrdiff_t row_stride) {
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, buffer, row_stride, nullptr))
    fail(ErrorCode::kInternal, std::string("png encode failed: ") + image.message);
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, buffer, row_stride, nullptr))
    fail(ErrorCode::kInternal, std::string("png encode failed: ") + image.message);
  out.resize(size);
  return out;
}

struct PngReader {
  png_image image{};
  explicit PngReader(std::string_view bytes) {
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
      fail(ErrorCode::kFormat, std::string("png decode failed: ") + image.message);
  }
  ~PngReader() { png_image_free(&image); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  template <class T>
  std::vector<T> finish(png_uint_32 format) {
    image.format = format;
    std::vector<T> buf(PNG_IMAGE_SIZE(image) / sizeof(T));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr))
      fail(ErrorCode::kFormat, std::string("png decode failed: ") + image.message);
    return buf;
  }
};

png_image blank_image(int width, int height, png_uint_32 format) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  return image;
}

}  // namespace

std::string encode_png(const Image& img) {
  std::vector<std::uint8_t> bytes(img.data().size());
  std::transform(img.data().begin(), img.data().end(), bytes.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  png_image image = blank_image(img.width(), img.height(),
                                img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY);
  return write_png(image, bytes.data(), 0);
}

Image decode_png(std::string_view bytes) {
  PngReader reader(bytes);
  const bool color = reader.image.format & PNG_FORMAT_FLAG_COLOR;
  const int channels = color ? 3 : 1;
  const int width = static_cast<int>(reader.image.width);
  const int height = static_cast<int>(reader.image.height);
  const auto raw = reader.finish<std::uint8_t>(color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY);
  std::vector<float> data(raw.size());
  std::transform(raw.begin(), raw.end(), data.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return Image(width, height, channels, std::move(data));
}

std::string encode_focus_map_png(const FocusMap& map) {
  if (map.label_count() > 255)
    fail(ErrorCode::kInvalidInput, "focus maps with more than 255 labels cannot be stored as PNG");
  std::vector<std::uint8_t> bytes(map.labels().size());
  std::transform(map.labels().data().begin(), map.labels().data().end(), bytes.begin(),
                 [](int l) { return static_cast<std::uint8_t>(l); });
  png_image image = blank_image(map.width(), map.height(), PNG_FORMAT_GRAY);
  return write_png(image, bytes.data(), 0);
}

FocusMap decode_focus_map_png(std::string_view bytes, int label_count) {
  PngReader reader(bytes);
  const int width = static_cast<int>(reader.image.width);
  const int height = static_cast<int>(reader.image.height);
  const auto raw = reader.finish<std::uint8_t>(PNG_FORMAT_GRAY);
  std::vector<int> labels(raw.begin(), raw.end());
  if (label_count == 0) label_count = *std::max_element(labels.begin(), labels.end());
  for (int l : labels) {
    if (l < 1 || l > label_count)
      fail(ErrorCode::kFormat, "focus map PNG holds label " + std::to_string(l) +
                                   " outside 1.." + std::to_string(label_count));
  }
  return FocusMap(Grid<int>(width, height, std::move(labels)), label_count);
}

std::string encode_depth_png(const DepthMap& depth) {
  std::vector<std::uint16_t> mm(depth.depths().size());
  std::transform(depth.depths().data().begin(), depth.depths().data().end(), mm.begin(),
                 [](double d) {
                   return static_cast<std::uint16_t>(std::clamp(std::lround(d * 1000.0), 0L, 65535L));
                 });
  png_image image = blank_image(depth.width(), depth.height(), PNG_FORMAT_LINEAR_Y);
  return write_png(image, mm.data(), 0);
}

std::vector<std::uint16_t> decode_depth_png_mm(std::string_view bytes, int* width, int* height) {
  PngReader reader(bytes);
  if (width) *width = static_cast<int>(reader.image.width);
  if (height) *height = static_cast<int>(reader.image.height);
  return reader.finish<std::uint16_t>(PNG_FORMAT_LINEAR_Y);
}

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

json layer_plan_to_json(const LayerPlan& plan) {
  json layers = json::array();
  for (const auto& e : plan.entries)
    layers.push_back({{"labels", e.labels}, {"slope", e.slope}, {"depth_m", e.depth_m}});
  return layers;
}

}  // namespace

std::string slab_meta_json(const SlabMeta& meta) {
  json j;
  j["format"] = "LFSLAB1";
  j["reference_label"] = meta.plan.reference_label();
  j["reference_depth_m"] = meta.plan.reference_depth_m;
  j["focal_length_m"] = meta.plan.focal_length_m;
  j["aperture_scale"] = meta.plan.aperture_scale;
  j["label_depths_m"] = meta.label_depths;
  j["layers"] = layer_plan_to_json(meta.plan);
  return j.dump();
}

SlabMeta parse_slab_meta_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    SlabMeta meta;
    meta.plan.reference_depth_m = j.at("reference_depth_m").get<double>();
    meta.plan.focal_length_m = j.at("focal_length_m").get<double>();
    meta.plan.aperture_scale = j.at("aperture_scale").get<double>();
    meta.label_depths = j.at("label_depths_m").get<std::vector<double>>();
    for (const auto& layer : j.at("layers")) {
      meta.plan.entries.push_back({layer.at("labels").get<std::vector<int>>(),
                                   layer.at("slope").get<double>(),
                                   layer.at("depth_m").get<double>()});
    }
    if (meta.plan.entries.empty() || meta.plan.entries.front().labels.empty())
      fail(ErrorCode::kFormat, "slab metadata has no layers");
    if (meta.plan.reference_label() != j.at("reference_label").get<int>())
      fail(ErrorCode::kFormat, "slab metadata reference label is inconsistent");
    return meta;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("bad slab metadata: ") + e.what());
  }
}

std::string encode_slab(const LightFieldSlab& slab) {
  const std::string meta = slab_meta_json(slab.meta());
  std::string out;
  out.reserve(8 + 16 + slab.data().size() * 4 + 4 + meta.size());
  out.append(kSlabMagic, sizeof(kSlabMagic));
  put_u32(out, static_cast<std::uint32_t>(slab.width()));
  put_u32(out, static_cast<std::uint32_t>(slab.height()));
  put_u32(out, static_cast<std::uint32_t>(slab.u_samples()));
  put_u32(out, static_cast<std::uint32_t>(slab.channels()));
  for (float v : slab.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  return out;
}

LightFieldSlab decode_slab(std::string_view bytes) {
  constexpr std::size_t kHeader = 8 + 16;
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kSlabMagic, 8) != 0)
    fail(ErrorCode::kFormat, "not a light field slab (bad magic)");
  const std::uint32_t width = get_u32(bytes, 8);
  const std::uint32_t height = get_u32(bytes, 12);
  const std::uint32_t u_samples = get_u32(bytes, 16);
  const std::uint32_t channels = get_u32(bytes, 20);
  const std::uint64_t count = std::uint64_t{width} * height * u_samples * channels;
  if (width == 0 || height == 0 || u_samples == 0 || (channels != 1 && channels != 3) ||
      count > (bytes.size() - kHeader) / 4)
    fail(ErrorCode::kFormat, "slab dimensions are inconsistent with the file size");
  const std::size_t trailer = kHeader + count * 4;
  if (bytes.size() < trailer + 4) fail(ErrorCode::kFormat, "slab metadata trailer is missing");
  const std::uint32_t meta_len = get_u32(bytes, trailer);
  if (bytes.size() != trailer + 4 + meta_len)
    fail(ErrorCode::kFormat, "slab metadata trailer length mismatch");

  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i)
    data[i] = std::bit_cast<float>(get_u32(bytes, kHeader + 4 * i));
  for (float v : data) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) fail(ErrorCode::kFormat, "slab sample outside [0,1]");
  }
  SlabMeta meta = parse_slab_meta_json(bytes.substr(trailer + 4, meta_len));
  return LightFieldSlab(static_cast<int>(width), static_cast<int>(height),
                        static_cast<int>(u_samples), static_cast<int>(channels), std::move(meta),
                        std::move(data));
}

std::string calibration_model_json(const CalibrationModel& model) {
  json rows = json::array();
  for (const auto& r : model.rows)
    rows.push_back({{"focus_param", r.focus_param},
                    {"midpoint_m", r.midpoint_m},
                    {"predicted_m", r.predicted_m}});
  json j{{"model", "inverse_distance_linear"},
         {"slope", model.slope},
         {"intercept", model.intercept},
         {"param_min", model.param_min},
         {"param_max", model.param_max},
         {"r_squared", model.r_squared},
         {"rows", rows}};
  return j.dump(2) + "\n";
}

CalibrationModel parse_calibration_model_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    CalibrationModel m;
    m.slope = j.at("slope").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.param_min = j.at("param_min").get<double>();
    m.param_max = j.at("param_max").get<double>();
    m.r_squared = j.value("r_squared", 0.0);
    if (j.contains("rows")) {
      for (const auto& r : j.at("rows"))
        m.rows.push_back({r.at("focus_param").get<double>(), r.at("midpoint_m").get<double>(),
                          r.at("predicted_m").get<double>()});
    }
    if (!(m.param_min <= m.param_max)) fail(ErrorCode::kFormat, "calibration model range is empty");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("bad calibration model: ") + e.what());
  }
}

Manifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    const json j = json::parse(text);
    Manifest m;
    m.base_dir = base_dir;
    m.focal_length_m = j.at("focal_length_mm").get<double>() / 1000.0;
    if (j.contains("calibration")) m.calibration_table = resolve(j.at("calibration").get<std::string>());
    if (j.contains("calibration_model"))
      m.calibration_model = resolve(j.at("calibration_model").get<std::string>());
    for (const auto& e : j.at("images")) {
      ManifestEntry entry;
      entry.path = resolve(e.at("path").get<std::string>());
      if (e.contains("focus_param")) entry.focus_param = e.at("focus_param").get<double>();
      if (e.contains("focus_distance_m"))
        entry.focus_distance_m = e.at("focus_distance_m").get<double>();
      m.images.push_back(std::move(entry));
    }
    if (m.images.empty()) fail(ErrorCode::kInvalidInput, "manifest lists no images");
    if (j.contains("params")) {
      const json& p = j.at("params");
      auto& q = m.params;
      q.score_steps = p.value("M", q.score_steps);
      q.lambda = p.value("lambda", q.lambda);
      q.median_radius = p.value("median_radius", q.median_radius);
      q.u_samples = p.value("u_samples", q.u_samples);
      if (p.contains("aperture_scale") && !p.at("aperture_scale").is_null())
        q.aperture_scale = p.at("aperture_scale").get<double>();
      q.max_parallax = p.value("max_parallax", q.max_parallax);
      q.threads = p.value("threads", q.threads);
    }
    CaptureMeta probe;
    probe.focal_length_m = m.focal_length_m;
    for (std::size_t i = 0; i < m.images.size(); ++i) {
      probe.focus_param = m.images[i].focus_param;
      probe.focus_distance_m = m.images[i].focus_distance_m;
      try {
        probe.validate();
      } catch (const Error& e) {
        fail(ErrorCode::kInvalidInput, "manifest image " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("bad manifest: ") + e.what());
  }
}

Manifest load_manifest(const fs::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

FocalStack load_stack(const Manifest& manifest) {
  std::vector<Image> images;
  std::vector<CaptureMeta> meta;
  for (const auto& e : manifest.images) {
    try {
      images.push_back(decode_png(read_file(e.path)));
    } catch (const Error& err) {
      fail(err.code(), e.path.string() + ": " + err.what());
    }
    CaptureMeta m;
    m.focus_param = e.focus_param;
    m.focus_distance_m = e.focus_distance_m;
    m.focal_length_m = manifest.focal_length_m;
    meta.push_back(m);
  }
  return FocalStack(std::move(images), std::move(meta));
}

std::optional<CalibrationModel> load_calibration(const Manifest& manifest) {
  if (manifest.calibration_model)
    return parse_calibration_model_json(read_file(*manifest.calibration_model));
  if (manifest.calibration_table)
    return fit_focus_curve(parse_calibration_csv(read_file(*manifest.calibration_table)));
  return std::nullopt;
}

}  // namespace lumistack
