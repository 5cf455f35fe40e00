#pragma once

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <memory>

namespace eccm::cli {

inline std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto lg = spdlog::get("eccm");
    if (!lg) lg = spdlog::stderr_color_mt("eccm");
    lg->set_pattern("%^%l%$: %v");
    return lg;
  }();
  return instance;
}

}  // namespace eccm::cli
