#pragma once

namespace quadforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace quadforge
