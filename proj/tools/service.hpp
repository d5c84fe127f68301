// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "lumistack/lumistack.h"

namespace httplib {
class Server;
}

namespace lumistack::service {

struct ServiceError : std::runtime_error {
  ls_status status;
  ServiceError(ls_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

struct ServiceFiles {
  std::string slab;
  std::string focus_png;
  std::string depth_png;     // optional; derived from the slab when empty
  std::string extended_png;  // optional; the u = 0 view when empty
  std::string web_root;      // optional static viewer directory
};

struct Reply {
  int status = 200;
  std::string content_type;
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Read-only renderer over one slab and its focus map. Views are memoized per
/// u and refocus results per label; every method is safe to call
/// concurrently.
class RenderService {
 public:
  explicit RenderService(const ServiceFiles& files, int threads = 1);
  ~RenderService();
  RenderService(const RenderService&) = delete;
  RenderService& operator=(const RenderService&) = delete;

  Reply meta() const;
  Reply view(const std::string& u_text);
  Reply refocus(const std::string& x_text, const std::string& y_text);
  Reply depth_png() const { return png(depth_png_); }
  Reply focus_png() const { return png(focus_png_); }
  Reply extended_png() const { return png(extended_png_); }
  Reply index() const;

  /// Registers every endpoint on `server`.
  void mount(httplib::Server& server);

 private:
  struct Refocused {
    std::string png;
    double depth_m;
  };
  static Reply png(const std::string& bytes);

  ls_slab* slab_ = nullptr;
  ls_focus_map* focus_ = nullptr;
  int threads_;
  int half_aperture_ = 0;
  std::string meta_;
  std::string depth_png_;
  std::string focus_png_;
  std::string extended_png_;
  std::string web_root_;

  std::mutex mutex_;
  std::map<int, std::string> views_;
  std::map<int, Refocused> refocused_;
};

}  // namespace lumistack::service
