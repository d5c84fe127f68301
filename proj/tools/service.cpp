// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "service.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

namespace lumistack::service {

namespace {

void check(ls_status s) {
  if (s != LS_OK) throw ServiceError(s, ls_last_error());
}

std::string take(ls_buffer* buf) {
  std::string out(reinterpret_cast<const char*>(ls_buffer_data(buf)), ls_buffer_size(buf));
  ls_buffer_free(buf);
  return out;
}

std::string encode(ls_image* img) {
  ls_buffer* buf = nullptr;
  const ls_status s = ls_image_encode_png(img, &buf);
  ls_image_free(img);
  check(s);
  return take(buf);
}

std::string slurp(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw ServiceError(LS_ERR_IO, "cannot open " + path);
  std::string out;
  char chunk[1 << 16];
  std::size_t n;
  while ((n = std::fread(chunk, 1, sizeof chunk, f)) > 0) out.append(chunk, n);
  std::fclose(f);
  return out;
}

std::optional<int> parse_int(const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || text.empty()) return std::nullopt;
  return v;
}

Reply error_reply(int status, const std::string& message) {
  return {status, "text/plain; charset=utf-8", message + "\n", {}};
}

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>lumistack</title></head>
<body><h1>lumistack render service</h1>
<p>The viewer is not bundled with this server. Endpoints:</p>
<ul><li>GET /meta</li><li>GET /view/{u}</li><li>GET /refocus?x=&amp;y=</li>
<li>GET /depth.png</li><li>GET /focus.png</li><li>GET /extended.png</li></ul>
</body></html>
)";

}  // namespace

RenderService::RenderService(const ServiceFiles& files, int threads)
    : threads_(threads), web_root_(files.web_root) {
  try {
    check(ls_slab_read(files.slab.c_str(), &slab_));
    int width = 0, height = 0, u_samples = 0;
    ls_slab_size(slab_, &width, &height, &u_samples, nullptr);
    half_aperture_ = (u_samples - 1) / 2;
    ls_buffer* buf = nullptr;
    check(ls_slab_meta(slab_, &buf));
    meta_ = take(buf);

    // Label count comes from the slab so a map with unused labels still loads.
    const int label_count = nlohmann::json::parse(meta_).at("K").get<int>();
    check(ls_focus_map_read_png(files.focus_png.c_str(), label_count, &focus_));
    int fw = 0, fh = 0;
    ls_focus_map_size(focus_, &fw, &fh, nullptr);
    if (fw != width || fh != height)
      throw ServiceError(LS_ERR_INVALID_INPUT, "focus map size does not match the slab");

    check(ls_focus_map_encode_png(focus_, &buf));
    focus_png_ = take(buf);
    if (!files.depth_png.empty()) {
      depth_png_ = slurp(files.depth_png);
    } else {
      ls_depth_map* depth = nullptr;
      check(ls_slab_depth_map(slab_, focus_, &depth));
      const ls_status s = ls_depth_map_encode_png(depth, &buf);
      ls_depth_map_free(depth);
      check(s);
      depth_png_ = take(buf);
    }
    if (!files.extended_png.empty()) {
      extended_png_ = slurp(files.extended_png);
    } else {
      ls_image* img = nullptr;
      check(ls_render_view(slab_, 0, &img));
      extended_png_ = encode(img);
    }
  } catch (...) {
    ls_focus_map_free(focus_);
    ls_slab_free(slab_);
    throw;
  }
}

RenderService::~RenderService() {
  ls_focus_map_free(focus_);
  ls_slab_free(slab_);
}

Reply RenderService::png(const std::string& bytes) { return {200, "image/png", bytes, {}}; }

Reply RenderService::meta() const { return {200, "application/json", meta_, {}}; }

Reply RenderService::index() const {
  if (!web_root_.empty()) {
    try {
      return {200, "text/html; charset=utf-8", slurp(web_root_ + "/index.html"), {}};
    } catch (const ServiceError&) {
    }
  }
  return {200, "text/html; charset=utf-8", kPlaceholderPage, {}};
}

Reply RenderService::view(const std::string& u_text) {
  const auto u = parse_int(u_text);
  if (!u) return error_reply(400, "u must be an integer");
  if (*u < -half_aperture_ || *u > half_aperture_)
    return error_reply(404, "u outside [" + std::to_string(-half_aperture_) + ", " +
                                std::to_string(half_aperture_) + "]");
  {
    std::lock_guard lock(mutex_);
    if (auto it = views_.find(*u); it != views_.end()) return png(it->second);
  }
  ls_image* img = nullptr;
  check(ls_render_view(slab_, *u, &img));
  std::string bytes = encode(img);
  std::lock_guard lock(mutex_);
  return png(views_.try_emplace(*u, std::move(bytes)).first->second);
}

Reply RenderService::refocus(const std::string& x_text, const std::string& y_text) {
  const auto x = parse_int(x_text);
  const auto y = parse_int(y_text);
  if (!x || !y) return error_reply(400, "x and y must be integers");
  int label = 0;
  if (ls_focus_map_label(focus_, *x, *y, &label) != LS_OK)
    return error_reply(400, ls_last_error());

  auto reply = [](const Refocused& r) {
    Reply out = png(r.png);
    char depth[64];
    std::snprintf(depth, sizeof depth, "%.17g", r.depth_m);
    out.headers["X-Chosen-Depth-M"] = depth;
    return out;
  };
  {
    std::lock_guard lock(mutex_);
    if (auto it = refocused_.find(label); it != refocused_.end()) return reply(it->second);
  }
  ls_image* img = nullptr;
  double depth_m = 0.0;
  check(ls_render_refocus_click(slab_, focus_, *x, *y, threads_, &img, nullptr, &depth_m,
                                nullptr));
  Refocused r{encode(img), depth_m};
  std::lock_guard lock(mutex_);
  return reply(refocused_.try_emplace(label, std::move(r)).first->second);
}

void RenderService::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_header("Cache-Control", "public, max-age=31536000, immutable");
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Expose-Headers", "X-Chosen-Depth-M");
    res.set_content(r.body, r.content_type);
  };
  auto guard = [send](auto&& fn) {
    return [send, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, fn(req));
      } catch (const ServiceError& e) {
        send(res, error_reply(e.status == LS_ERR_INTERNAL ? 500 : 400, e.what()));
      } catch (const std::exception& e) {
        send(res, error_reply(500, e.what()));
      }
    };
  };

  server.Get("/", guard([this](const httplib::Request&) { return index(); }));
  server.Get("/meta", guard([this](const httplib::Request&) { return meta(); }));
  server.Get(R"(/view/([^/]+))",
             guard([this](const httplib::Request& req) { return view(req.matches[1]); }));
  server.Get("/refocus", guard([this](const httplib::Request& req) {
               return refocus(req.get_param_value("x"), req.get_param_value("y"));
             }));
  server.Get("/depth.png", guard([this](const httplib::Request&) { return depth_png(); }));
  server.Get("/focus.png", guard([this](const httplib::Request&) { return focus_png(); }));
  server.Get("/extended.png", guard([this](const httplib::Request&) { return extended_png(); }));
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "*");
    res.status = 204;
  });
  if (!web_root_.empty()) server.set_mount_point("/static", web_root_);
}

}  // namespace lumistack::service
