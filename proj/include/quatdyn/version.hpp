#pragma once

namespace quatdyn {

inline constexpr const char* kToolName = "quatdyn";
inline constexpr const char* kVersion = "0.1.0";

} // namespace quatdyn
