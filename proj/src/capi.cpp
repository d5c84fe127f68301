// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/lumistack.h"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "json.hpp"
#include "lumistack/focusmap.hpp"
#include "lumistack/io.hpp"
#include "lumistack/optics.hpp"
#include "lumistack/render.hpp"
#include "lumistack/tomography.hpp"

using namespace lumistack;

struct ls_buffer {
  std::string bytes;
};
struct ls_image {
  Image image;
};
struct ls_calibration {
  CalibrationModel model;
};
struct ls_stack {
  Manifest manifest;
  FocalStack stack;
};
struct ls_focus_map {
  FocusMap map;
  nlohmann::json sidecar;
};
struct ls_depth_map {
  DepthMap depth;
};
struct ls_slab {
  LightFieldSlab slab;
};

namespace {

thread_local std::string g_last_error;

ls_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return LS_ERR_INVALID_INPUT;
    case ErrorCode::kCalibration: return LS_ERR_CALIBRATION;
    case ErrorCode::kNoRealImage: return LS_ERR_NO_REAL_IMAGE;
    case ErrorCode::kIo: return LS_ERR_IO;
    case ErrorCode::kFormat: return LS_ERR_FORMAT;
    case ErrorCode::kInternal: return LS_ERR_INTERNAL;
  }
  return LS_ERR_INTERNAL;
}

template <class Fn>
ls_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::kInvalidInput, std::string(what) + " is null");
}

PipelineParams to_pipeline(const ls_params* p) {
  PipelineParams out;
  if (!p) return out;
  out.score_steps = p->score_steps;
  out.lambda = p->lambda;
  out.median_radius = p->median_radius;
  out.u_samples = p->u_samples;
  if (p->aperture_scale > 0.0) out.aperture_scale = p->aperture_scale;
  out.max_parallax = p->max_parallax;
  out.threads = p->threads;
  return out;
}

void from_pipeline(const PipelineParams& q, ls_params* p) {
  p->score_steps = q.score_steps;
  p->lambda = q.lambda;
  p->median_radius = q.median_radius;
  p->u_samples = q.u_samples;
  p->aperture_scale = q.aperture_scale.value_or(0.0);
  p->max_parallax = q.max_parallax;
  p->threads = q.threads;
}

ls_buffer* make_buffer(std::string bytes) { return new ls_buffer{std::move(bytes)}; }

}  // namespace

extern "C" {

const char* ls_version(void) { return "0.1.0"; }

const char* ls_last_error(void) { return g_last_error.c_str(); }

void ls_params_default(ls_params* out) {
  if (out) from_pipeline(PipelineParams{}, out);
}

const uint8_t* ls_buffer_data(const ls_buffer* buf) {
  return buf ? reinterpret_cast<const uint8_t*>(buf->bytes.data()) : nullptr;
}
size_t ls_buffer_size(const ls_buffer* buf) { return buf ? buf->bytes.size() : 0; }
void ls_buffer_free(ls_buffer* buf) { delete buf; }

ls_status ls_image_read_png(const char* path, ls_image** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ls_image{decode_png(read_file(path))};
  });
}

ls_status ls_image_write_png(const ls_image* img, const char* path) {
  return guarded([&] {
    require(img, "image");
    require(path, "path");
    write_file_atomic(path, encode_png(img->image));
  });
}

ls_status ls_image_encode_png(const ls_image* img, ls_buffer** out) {
  return guarded([&] {
    require(img, "image");
    require(out, "out");
    *out = make_buffer(encode_png(img->image));
  });
}

void ls_image_size(const ls_image* img, int* width, int* height, int* channels) {
  if (!img) return;
  if (width) *width = img->image.width();
  if (height) *height = img->image.height();
  if (channels) *channels = img->image.channels();
}

void ls_image_free(ls_image* img) { delete img; }

ls_status ls_calibration_fit_csv(const char* table_path, double last_row_weight,
                                 ls_calibration** out) {
  return guarded([&] {
    require(table_path, "table path");
    require(out, "out");
    const auto table = parse_calibration_csv(read_file(table_path));
    *out = new ls_calibration{fit_focus_curve(table, FitOptions{last_row_weight})};
  });
}

ls_status ls_calibration_load(const char* model_path, ls_calibration** out) {
  return guarded([&] {
    require(model_path, "model path");
    require(out, "out");
    *out = new ls_calibration{parse_calibration_model_json(read_file(model_path))};
  });
}

ls_status ls_calibration_save(const ls_calibration* cal, const char* model_path) {
  return guarded([&] {
    require(cal, "calibration");
    require(model_path, "model path");
    write_file_atomic(model_path, calibration_model_json(cal->model));
  });
}

void ls_calibration_coefficients(const ls_calibration* cal, double* slope, double* intercept,
                                 double* r_squared) {
  if (!cal) return;
  if (slope) *slope = cal->model.slope;
  if (intercept) *intercept = cal->model.intercept;
  if (r_squared) *r_squared = cal->model.r_squared;
}

int ls_calibration_row_count(const ls_calibration* cal) {
  return cal ? static_cast<int>(cal->model.rows.size()) : 0;
}

ls_status ls_calibration_row(const ls_calibration* cal, int index, double* focus_param,
                             double* midpoint_m, double* predicted_m) {
  return guarded([&] {
    require(cal, "calibration");
    if (index < 0 || index >= static_cast<int>(cal->model.rows.size()))
      fail(ErrorCode::kInvalidInput, "calibration row index out of range");
    const auto& r = cal->model.rows[index];
    if (focus_param) *focus_param = r.focus_param;
    if (midpoint_m) *midpoint_m = r.midpoint_m;
    if (predicted_m) *predicted_m = r.predicted_m;
  });
}

ls_status ls_calibration_depth(const ls_calibration* cal, double focus_param, double* depth_m,
                               int* clamped) {
  return guarded([&] {
    require(cal, "calibration");
    require(depth_m, "depth_m");
    bool was_clamped = false;
    *depth_m = focus_param_to_depth(cal->model, focus_param, &was_clamped);
    if (clamped) *clamped = was_clamped ? 1 : 0;
  });
}

void ls_calibration_free(ls_calibration* cal) { delete cal; }

ls_status ls_stack_open(const char* manifest_path, ls_stack** out, ls_params* params) {
  return guarded([&] {
    require(manifest_path, "manifest path");
    require(out, "out");
    Manifest manifest = load_manifest(manifest_path);
    FocalStack stack = load_stack(manifest);
    if (params) from_pipeline(manifest.params, params);
    *out = new ls_stack{std::move(manifest), std::move(stack)};
  });
}

void ls_stack_size(const ls_stack* stack, int* width, int* height, int* channels, int* count) {
  if (!stack) return;
  if (width) *width = stack->stack.width();
  if (height) *height = stack->stack.height();
  if (channels) *channels = stack->stack.channels();
  if (count) *count = stack->stack.size();
}

ls_status ls_stack_calibration(const ls_stack* stack, ls_calibration** out) {
  return guarded([&] {
    require(stack, "stack");
    require(out, "out");
    auto model = load_calibration(stack->manifest);
    *out = model ? new ls_calibration{std::move(*model)} : nullptr;
  });
}

void ls_stack_free(ls_stack* stack) { delete stack; }

ls_status ls_focus_map_compute(const ls_stack* stack, const ls_params* params,
                               ls_focus_map** out) {
  return guarded([&] {
    require(stack, "stack");
    require(out, "out");
    const PipelineParams p = params ? to_pipeline(params) : stack->manifest.params;
    FocusMapOptions options;
    options.score = ScoreConfig::uniform(p.score_steps);
    options.lambda = p.lambda;
    options.threads = p.threads;
    FocusMapResult result = compute_focus_map(stack->stack, options);
    FocusMap filtered = median_filter_labels(result.map, p.median_radius, p.threads);

    nlohmann::json thresholds = nlohmann::json::array();
    for (const auto& t : result.thresholds)
      thresholds.push_back({{"delta", t.delta}, {"textureless", t.textureless}});
    nlohmann::json sidecar{{"K", stack->stack.size()},
                           {"width", filtered.width()},
                           {"height", filtered.height()},
                           {"M", p.score_steps},
                           {"weights", options.score.weights},
                           {"lambda", p.lambda},
                           {"median_radius", p.median_radius},
                           {"thresholds", thresholds},
                           {"initial_energy", result.initial_energy},
                           {"final_energy", result.final_energy},
                           {"accepted_moves", result.stats.accepted_moves}};
    *out = new ls_focus_map{std::move(filtered), std::move(sidecar)};
  });
}

ls_status ls_focus_map_read_png(const char* path, int label_count, ls_focus_map** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    FocusMap map = decode_focus_map_png(read_file(path), label_count);
    nlohmann::json sidecar{{"K", map.label_count()}, {"width", map.width()}, {"height", map.height()}};
    *out = new ls_focus_map{std::move(map), std::move(sidecar)};
  });
}

ls_status ls_focus_map_write_png(const ls_focus_map* map, const char* path) {
  return guarded([&] {
    require(map, "focus map");
    require(path, "path");
    write_file_atomic(path, encode_focus_map_png(map->map));
  });
}

ls_status ls_focus_map_encode_png(const ls_focus_map* map, ls_buffer** out) {
  return guarded([&] {
    require(map, "focus map");
    require(out, "out");
    *out = make_buffer(encode_focus_map_png(map->map));
  });
}

ls_status ls_focus_map_sidecar(const ls_focus_map* map, ls_buffer** out) {
  return guarded([&] {
    require(map, "focus map");
    require(out, "out");
    *out = make_buffer(map->sidecar.dump(2) + "\n");
  });
}

ls_status ls_focus_map_label(const ls_focus_map* map, int x, int y, int* label) {
  return guarded([&] {
    require(map, "focus map");
    require(label, "label");
    if (!map->map.labels().contains(x, y)) fail(ErrorCode::kInvalidInput, "pixel outside the focus map");
    *label = map->map(x, y);
  });
}

void ls_focus_map_size(const ls_focus_map* map, int* width, int* height, int* label_count) {
  if (!map) return;
  if (width) *width = map->map.width();
  if (height) *height = map->map.height();
  if (label_count) *label_count = map->map.label_count();
}

void ls_focus_map_free(ls_focus_map* map) { delete map; }

ls_status ls_depth_map_compute(const ls_stack* stack, const ls_focus_map* map,
                               const ls_calibration* cal, ls_depth_map** out) {
  return guarded([&] {
    require(stack, "stack");
    require(map, "focus map");
    require(out, "out");
    *out = new ls_depth_map{
        focus_map_to_depth_map(map->map, stack->stack.metas(), cal ? &cal->model : nullptr)};
  });
}

ls_status ls_depth_map_write_png(const ls_depth_map* depth, const char* path) {
  return guarded([&] {
    require(depth, "depth map");
    require(path, "path");
    write_file_atomic(path, encode_depth_png(depth->depth));
  });
}

ls_status ls_depth_map_encode_png(const ls_depth_map* depth, ls_buffer** out) {
  return guarded([&] {
    require(depth, "depth map");
    require(out, "out");
    *out = make_buffer(encode_depth_png(depth->depth));
  });
}

ls_status ls_depth_map_sidecar(const ls_depth_map* depth, ls_buffer** out) {
  return guarded([&] {
    require(depth, "depth map");
    require(out, "out");
    const auto d = depth->depth.label_depths();
    nlohmann::json j{{"K", d.size()},
                     {"label_depths_m", std::vector<double>(d.begin(), d.end())},
                     {"png_units", "millimetres"},
                     {"png_clamp_m", 65.535}};
    *out = make_buffer(j.dump(2) + "\n");
  });
}

int ls_depth_map_label_count(const ls_depth_map* depth) {
  return depth ? static_cast<int>(depth->depth.label_depths().size()) : 0;
}

double ls_depth_map_label_depth(const ls_depth_map* depth, int label) {
  if (!depth || label < 1 || label > ls_depth_map_label_count(depth)) return 0.0;
  return depth->depth.label_depths()[label - 1];
}

void ls_depth_map_free(ls_depth_map* depth) { delete depth; }

ls_status ls_extended_focus(const ls_stack* stack, const ls_focus_map* map, ls_image** out) {
  return guarded([&] {
    require(stack, "stack");
    require(map, "focus map");
    require(out, "out");
    *out = new ls_image{extended_focus(stack->stack, map->map)};
  });
}

ls_status ls_slab_reconstruct(const ls_stack* stack, const ls_focus_map* map,
                              const ls_depth_map* depth, const ls_params* params,
                              ls_slab** out) {
  return guarded([&] {
    require(stack, "stack");
    require(map, "focus map");
    require(depth, "depth map");
    require(out, "out");
    const PipelineParams p = params ? to_pipeline(params) : stack->manifest.params;
    ReconstructOptions options;
    options.focal_length_m = stack->manifest.focal_length_m;
    options.u_samples = p.u_samples;
    options.threads = p.threads;
    options.aperture_scale =
        p.aperture_scale ? *p.aperture_scale
                         : aperture_scale_for_parallax(depth->depth.label_depths(),
                                                       options.focal_length_m, p.max_parallax,
                                                       p.u_samples);
    *out = new ls_slab{reconstruct_slab(stack->stack, map->map, depth->depth, options)};
  });
}

ls_status ls_slab_read(const char* path, ls_slab** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ls_slab{decode_slab(read_file(path))};
  });
}

ls_status ls_slab_write(const ls_slab* slab, const char* path) {
  return guarded([&] {
    require(slab, "slab");
    require(path, "path");
    write_file_atomic(path, encode_slab(slab->slab));
  });
}

ls_status ls_slab_encode(const ls_slab* slab, ls_buffer** out) {
  return guarded([&] {
    require(slab, "slab");
    require(out, "out");
    *out = make_buffer(encode_slab(slab->slab));
  });
}

void ls_slab_size(const ls_slab* slab, int* width, int* height, int* u_samples, int* channels) {
  if (!slab) return;
  if (width) *width = slab->slab.width();
  if (height) *height = slab->slab.height();
  if (u_samples) *u_samples = slab->slab.u_samples();
  if (channels) *channels = slab->slab.channels();
}

ls_status ls_slab_meta(const ls_slab* slab, ls_buffer** out) {
  return guarded([&] {
    require(slab, "slab");
    require(out, "out");
    const auto& s = slab->slab;
    const auto& plan = s.meta().plan;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& e : plan.entries)
      layers.push_back({{"labels", e.labels}, {"slope", e.slope}, {"depth_m", e.depth_m}});
    std::vector<double> slopes;
    for (int label = 1; label <= static_cast<int>(s.meta().label_depths.size()); ++label)
      slopes.push_back(plan.slope_of(label));
    nlohmann::json j{{"X", s.width()},
                     {"Y", s.height()},
                     {"U", s.u_samples()},
                     {"channels", s.channels()},
                     {"K", s.meta().label_depths.size()},
                     {"u_min", -s.half_aperture()},
                     {"u_max", s.half_aperture()},
                     {"label_depths_m", s.meta().label_depths},
                     {"label_slopes", slopes},
                     {"reference_label", plan.reference_label()},
                     {"reference_depth_m", plan.reference_depth_m},
                     {"focal_length_m", plan.focal_length_m},
                     {"aperture_scale", plan.aperture_scale},
                     {"layers", layers}};
    *out = make_buffer(j.dump());
  });
}

ls_status ls_slab_depth_map(const ls_slab* slab, const ls_focus_map* map, ls_depth_map** out) {
  return guarded([&] {
    require(slab, "slab");
    require(map, "focus map");
    require(out, "out");
    if (map->map.width() != slab->slab.width() || map->map.height() != slab->slab.height())
      fail(ErrorCode::kInvalidInput, "focus map size does not match the slab");
    *out = new ls_depth_map{DepthMap(map->map, slab->slab.meta().label_depths)};
  });
}

void ls_slab_free(ls_slab* slab) { delete slab; }

ls_status ls_render_view(const ls_slab* slab, int u, ls_image** out) {
  return guarded([&] {
    require(slab, "slab");
    require(out, "out");
    *out = new ls_image{view_at(slab->slab, u)};
  });
}

ls_status ls_render_refocus(const ls_slab* slab, double slope, int threads, ls_image** out) {
  return guarded([&] {
    require(slab, "slab");
    require(out, "out");
    *out = new ls_image{refocus(slab->slab, slope, threads)};
  });
}

ls_status ls_render_refocus_depth(const ls_slab* slab, double depth_m, int threads,
                                  ls_image** out, double* slope) {
  return guarded([&] {
    require(slab, "slab");
    require(out, "out");
    const double s = slope_for_depth(slab->slab, depth_m);
    *out = new ls_image{refocus(slab->slab, s, threads)};
    if (slope) *slope = s;
  });
}

ls_status ls_render_refocus_click(const ls_slab* slab, const ls_focus_map* map, int x, int y,
                                  int threads, ls_image** out, int* label, double* depth_m,
                                  double* slope) {
  return guarded([&] {
    require(slab, "slab");
    require(map, "focus map");
    require(out, "out");
    const auto& s = slab->slab;
    if (map->map.width() != s.width() || map->map.height() != s.height())
      fail(ErrorCode::kInvalidInput, "focus map size does not match the slab");
    const DepthMap depth(map->map, s.meta().label_depths);
    RefocusResult r = refocus_at_point(s, map->map, depth, s.meta().plan.focal_length_m,
                                       s.meta().plan.aperture_scale, x, y, threads);
    *out = new ls_image{std::move(r.image)};
    if (label) *label = r.label;
    if (depth_m) *depth_m = r.depth_m;
    if (slope) *slope = r.slope;
  });
}

ls_status ls_sweep_positions(int u_min, int u_max, int frames, int* positions, int capacity,
                             int* count) {
  return guarded([&] {
    const auto us = sweep_positions(u_min, u_max, frames);
    if (count) *count = static_cast<int>(us.size());
    for (int i = 0; i < capacity && i < static_cast<int>(us.size()); ++i) positions[i] = us[i];
  });
}

}  // extern "C"
