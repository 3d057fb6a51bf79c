#pragma once

namespace zisofr {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace zisofr
