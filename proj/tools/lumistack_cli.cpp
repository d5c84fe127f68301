// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors
//
// Command-line driver. Every command renders its products into memory first
// and only then writes them, so a failure leaves no partial outputs behind.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "lumistack/lumistack.h"
#include "service.hpp"

namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  int exit_code;
  Failure(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
};

void check(ls_status s) {
  if (s == LS_OK) return;
  throw Failure(s == LS_ERR_INTERNAL ? 2 : 1, ls_last_error());
}

// RAII wrapper for C handles.
template <class T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  ~Handle() { Free(p_); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& other) noexcept : p_(std::exchange(other.p_, nullptr)) {}
  Handle& operator=(Handle&&) = delete;
  T** out() { return &p_; }
  T* get() const { return p_; }
  explicit operator bool() const { return p_ != nullptr; }

 private:
  T* p_ = nullptr;
};

using Buffer = Handle<ls_buffer, ls_buffer_free>;
using ImageH = Handle<ls_image, ls_image_free>;
using CalibrationH = Handle<ls_calibration, ls_calibration_free>;
using StackH = Handle<ls_stack, ls_stack_free>;
using FocusH = Handle<ls_focus_map, ls_focus_map_free>;
using DepthH = Handle<ls_depth_map, ls_depth_map_free>;
using SlabH = Handle<ls_slab, ls_slab_free>;

std::string bytes(const Buffer& b) {
  return std::string(reinterpret_cast<const char*>(ls_buffer_data(b.get())),
                     ls_buffer_size(b.get()));
}

std::string png_of(const ls_image* img) {
  Buffer b;
  check(ls_image_encode_png(img, b.out()));
  return bytes(b);
}

std::string sidecar_path(const std::string& out) {
  return fs::path(out).replace_extension(".json").string();
}

/// Pending outputs, written together. Each file goes to a temporary name and
/// is renamed into place; on any failure everything already placed is removed.
class Outputs {
 public:
  void add(std::string path, std::string data) {
    if (path.empty()) return;
    files_.emplace_back(std::move(path), std::move(data));
  }

  void commit() {
    std::vector<std::string> placed;
    try {
      for (const auto& [path, data] : files_) {
        const std::string tmp = path + ".partial";
        {
          std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
          if (!f) throw Failure(1, "cannot write " + path);
          f.write(data.data(), static_cast<std::streamsize>(data.size()));
          f.close();
          if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Failure(1, "cannot write " + path);
          }
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec) {
          fs::remove(tmp, ec);
          throw Failure(1, "cannot write " + path);
        }
        placed.push_back(path);
      }
    } catch (...) {
      for (const auto& p : placed) {
        std::error_code ec;
        fs::remove(p, ec);
      }
      throw;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct PipelineFlags {
  std::string manifest;
  std::string model;
  std::string focus;
  std::optional<int> u_samples;
  std::optional<double> max_parallax;
  std::optional<double> aperture_scale;
  std::optional<double> lambda;
  std::optional<int> median_radius;
  std::optional<int> score_steps;
};

struct Pipeline {
  StackH stack;
  ls_params params{};
};

int g_threads = 1;

Pipeline open_pipeline(const PipelineFlags& f) {
  Pipeline p;
  check(ls_stack_open(f.manifest.c_str(), p.stack.out(), &p.params));
  if (f.u_samples) p.params.u_samples = *f.u_samples;
  if (f.max_parallax) p.params.max_parallax = *f.max_parallax;
  if (f.aperture_scale) p.params.aperture_scale = *f.aperture_scale;
  if (f.lambda) p.params.lambda = *f.lambda;
  if (f.median_radius) p.params.median_radius = *f.median_radius;
  if (f.score_steps) p.params.score_steps = *f.score_steps;
  p.params.threads = g_threads;
  return p;
}

void focus_map(const Pipeline& p, const PipelineFlags& f, FocusH& out) {
  if (f.focus.empty()) {
    check(ls_focus_map_compute(p.stack.get(), &p.params, out.out()));
    return;
  }
  int count = 0;
  ls_stack_size(p.stack.get(), nullptr, nullptr, nullptr, &count);
  check(ls_focus_map_read_png(f.focus.c_str(), count, out.out()));
}

void depth_map(const Pipeline& p, const PipelineFlags& f, const FocusH& focus, DepthH& out) {
  CalibrationH cal;
  if (!f.model.empty())
    check(ls_calibration_load(f.model.c_str(), cal.out()));
  else
    check(ls_stack_calibration(p.stack.get(), cal.out()));
  check(ls_depth_map_compute(p.stack.get(), focus.get(), cal.get(), out.out()));
}

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--manifest", f.manifest, "Stack manifest (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--u-samples", f.u_samples, "Number of u samples (odd)");
  cmd->add_option("--max-parallax", f.max_parallax, "Largest layer shift at the aperture edge, pixels");
  cmd->add_option("--aperture-scale", f.aperture_scale, "Aperture scale A; overrides --max-parallax");
  cmd->add_option("--lambda", f.lambda, "Smoothness weight");
  cmd->add_option("--median-radius", f.median_radius, "Median filter radius");
  cmd->add_option("--steps", f.score_steps, "Sharpness threshold steps M");
}

std::pair<int, int> parse_click(const std::string& text) {
  int x = 0, y = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d,%d%c", &x, &y, &extra) != 2)
    throw Failure(1, "--click expects x,y");
  return {x, y};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light field reconstruction from a focal stack"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(ls_version()));
  app.add_option("--threads", g_threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string out;

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Fit the focus-parameter to depth curve");
  std::string table;
  double last_row_weight = 0.25;
  calibrate->add_option("--table", table, "focus_param,near_m,far_m CSV")->required();
  calibrate->add_option("--out", out, "Model file")->required();
  calibrate->add_option("--last-row-weight", last_row_weight, "Weight of the final row");

  // focusmap / depthmap / extended / reconstruct
  PipelineFlags pf;
  auto* focusmap = app.add_subcommand("focusmap", "Estimate the focus map");
  add_pipeline_flags(focusmap, pf);
  focusmap->add_option("--out", out, "Focus map PNG; sidecar gets .json")->required();

  auto* depthmap = app.add_subcommand("depthmap", "Convert the focus map to metric depth");
  add_pipeline_flags(depthmap, pf);
  depthmap->add_option("--model", pf.model, "Calibration model (else the manifest's)");
  depthmap->add_option("--focus", pf.focus, "Existing focus map PNG");
  depthmap->add_option("--out", out, "Depth PNG (16-bit mm); sidecar gets .json")->required();

  auto* extended = app.add_subcommand("extended", "Render the extended focus image");
  add_pipeline_flags(extended, pf);
  extended->add_option("--focus", pf.focus, "Existing focus map PNG");
  extended->add_option("--out", out, "Output PNG")->required();

  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct the light field slab");
  add_pipeline_flags(reconstruct, pf);
  std::string focus_out, depth_out, extended_out;
  reconstruct->add_option("--model", pf.model, "Calibration model (else the manifest's)");
  reconstruct->add_option("--focus", pf.focus, "Existing focus map PNG");
  reconstruct->add_option("--out", out, "Slab file")->required();
  reconstruct->add_option("--focus-out", focus_out, "Also write the focus map PNG");
  reconstruct->add_option("--depth-out", depth_out, "Also write the depth PNG");
  reconstruct->add_option("--extended", extended_out, "Also write the extended focus PNG");

  // sweep / refocus
  std::string slab_path, focus_path;
  auto* sweep = app.add_subcommand("sweep", "Render a perspective sweep");
  int u_min = 0, u_max = 0, frames = 0;
  sweep->add_option("--slab", slab_path, "Slab file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--u-min", u_min)->required();
  sweep->add_option("--u-max", u_max)->required();
  sweep->add_option("--frames", frames)->required();
  sweep->add_option("--out", out, "Frame prefix; frames are <out>_0000.png, ...")->required();

  auto* refocus = app.add_subcommand("refocus", "Refocus the slab");
  std::optional<double> depth_m;
  std::string click;
  refocus->add_option("--slab", slab_path, "Slab file")->required()->check(CLI::ExistingFile);
  auto* depth_opt = refocus->add_option("--depth", depth_m, "Focus depth in metres");
  auto* click_opt = refocus->add_option("--click", click, "x,y pixel to focus on");
  depth_opt->excludes(click_opt);
  refocus->add_option("--focus", focus_path, "Focus map PNG (needed by --click)");
  refocus->add_option("--out", out, "Output PNG")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve renders over HTTP");
  lumistack::service::ServiceFiles files;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--slab", files.slab, "Slab file")->required()->check(CLI::ExistingFile);
  serve->add_option("--focus", files.focus_png, "Focus map PNG")->required()->check(CLI::ExistingFile);
  serve->add_option("--depth", files.depth_png, "Depth PNG");
  serve->add_option("--extended", files.extended_png, "Extended focus PNG");
  serve->add_option("--web-root", files.web_root, "Directory holding the viewer");
  serve->add_option("--host", host);
  serve->add_option("--port", port, "0 picks a free port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Outputs outputs;
    if (*calibrate) {
      CalibrationH cal;
      check(ls_calibration_fit_csv(table.c_str(), last_row_weight, cal.out()));
      double slope = 0, intercept = 0, r2 = 0;
      ls_calibration_coefficients(cal.get(), &slope, &intercept, &r2);
      std::printf("1/D = %.9g * F + %.9g   R^2 = %.6f\n", slope, intercept, r2);
      std::printf("%12s %12s %12s %9s\n", "focus_param", "midpoint_m", "predicted_m", "error");
      for (int i = 0; i < ls_calibration_row_count(cal.get()); ++i) {
        double f = 0, mid = 0, pred = 0;
        check(ls_calibration_row(cal.get(), i, &f, &mid, &pred));
        std::printf("%12g %12.4f %12.4f %8.2f%%\n", f, mid, pred, 100.0 * (pred - mid) / mid);
      }
      check(ls_calibration_save(cal.get(), out.c_str()));
    } else if (*focusmap) {
      Pipeline p = open_pipeline(pf);
      FocusH map;
      check(ls_focus_map_compute(p.stack.get(), &p.params, map.out()));
      Buffer png, side;
      check(ls_focus_map_encode_png(map.get(), png.out()));
      check(ls_focus_map_sidecar(map.get(), side.out()));
      outputs.add(out, bytes(png));
      outputs.add(sidecar_path(out), bytes(side));
    } else if (*depthmap) {
      Pipeline p = open_pipeline(pf);
      FocusH map;
      DepthH depth;
      focus_map(p, pf, map);
      depth_map(p, pf, map, depth);
      Buffer png, side;
      check(ls_depth_map_encode_png(depth.get(), png.out()));
      check(ls_depth_map_sidecar(depth.get(), side.out()));
      outputs.add(out, bytes(png));
      outputs.add(sidecar_path(out), bytes(side));
    } else if (*extended) {
      Pipeline p = open_pipeline(pf);
      FocusH map;
      focus_map(p, pf, map);
      ImageH img;
      check(ls_extended_focus(p.stack.get(), map.get(), img.out()));
      outputs.add(out, png_of(img.get()));
    } else if (*reconstruct) {
      Pipeline p = open_pipeline(pf);
      FocusH map;
      DepthH depth;
      SlabH slab;
      focus_map(p, pf, map);
      depth_map(p, pf, map, depth);
      check(ls_slab_reconstruct(p.stack.get(), map.get(), depth.get(), &p.params, slab.out()));
      Buffer slab_bytes;
      check(ls_slab_encode(slab.get(), slab_bytes.out()));
      outputs.add(out, bytes(slab_bytes));
      if (!focus_out.empty()) {
        Buffer b;
        check(ls_focus_map_encode_png(map.get(), b.out()));
        outputs.add(focus_out, bytes(b));
      }
      if (!depth_out.empty()) {
        Buffer b;
        check(ls_depth_map_encode_png(depth.get(), b.out()));
        outputs.add(depth_out, bytes(b));
      }
      if (!extended_out.empty()) {
        ImageH img;
        check(ls_extended_focus(p.stack.get(), map.get(), img.out()));
        outputs.add(extended_out, png_of(img.get()));
      }
    } else if (*sweep) {
      SlabH slab;
      check(ls_slab_read(slab_path.c_str(), slab.out()));
      int count = 0;
      check(ls_sweep_positions(u_min, u_max, frames, nullptr, 0, &count));
      std::vector<int> us(count);
      check(ls_sweep_positions(u_min, u_max, frames, us.data(), count, &count));
      for (int i = 0; i < count; ++i) {
        ImageH img;
        check(ls_render_view(slab.get(), us[i], img.out()));
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_%04d.png", i);
        outputs.add(out + suffix, png_of(img.get()));
      }
    } else if (*refocus) {
      if (!depth_m && click.empty()) throw Failure(1, "refocus needs --depth or --click");
      SlabH slab;
      check(ls_slab_read(slab_path.c_str(), slab.out()));
      ImageH img;
      if (depth_m) {
        double slope = 0;
        check(ls_render_refocus_depth(slab.get(), *depth_m, g_threads, img.out(), &slope));
        std::printf("depth_m %.9g slope %.9g\n", *depth_m, slope);
      } else {
        if (focus_path.empty()) throw Failure(1, "--click needs --focus");
        const auto [x, y] = parse_click(click);
        Buffer meta;
        check(ls_slab_meta(slab.get(), meta.out()));
        const int k = nlohmann::json::parse(bytes(meta)).at("K").get<int>();
        FocusH map;
        check(ls_focus_map_read_png(focus_path.c_str(), k, map.out()));
        int label = 0;
        double chosen = 0, slope = 0;
        check(ls_render_refocus_click(slab.get(), map.get(), x, y, g_threads, img.out(), &label,
                                      &chosen, &slope));
        std::printf("label %d depth_m %.17g slope %.9g\n", label, chosen, slope);
      }
      outputs.add(out, png_of(img.get()));
    } else if (*serve) {
      lumistack::service::RenderService service(files, g_threads);
      httplib::Server server;
      service.mount(server);
      int bound = port;
      if (port == 0) {
        bound = server.bind_to_any_port(host);
      } else if (!server.bind_to_port(host, port)) {
        bound = -1;
      }
      if (bound < 0) throw Failure(1, "cannot listen on " + host + ":" + std::to_string(port));
      std::printf("listening on http://%s:%d\n", host.c_str(), bound);
      std::fflush(stdout);
      if (!server.listen_after_bind()) throw Failure(2, "server stopped unexpectedly");
    }
    outputs.commit();
  } catch (const lumistack::service::ServiceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.status == LS_ERR_INTERNAL ? 2 : 1;
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
