#pragma once

namespace ccr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ccr
