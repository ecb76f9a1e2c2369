#pragma once

namespace stefan_lab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stefan_lab
