#pragma once

namespace lppl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lppl
