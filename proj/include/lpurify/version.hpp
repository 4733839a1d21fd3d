#pragma once

#include <string_view>

namespace lpurify {

// Embedded in every artifact manifest so runs can be attributed to a build.
inline constexpr std::string_view kVersion = "v0.1.0";

}  // namespace lpurify
