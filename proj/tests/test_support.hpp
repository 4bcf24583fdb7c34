#pragma once

#include <string>

#include "sawqed/device.hpp"

namespace sawqed::fixtures {

inline std::string data_path(const std::string& name) { return std::string(SAWQED_DATA_DIR) + "/" + name; }

inline const DeviceConfig& reference_device() {
  static const DeviceConfig cfg = load_config(data_path("paper_device.json"));
  return cfg;
}

}  // namespace sawqed::fixtures
