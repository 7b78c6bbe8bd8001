#pragma once

namespace fracnd {

inline constexpr const char* kToolName = "fracnd";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace fracnd
