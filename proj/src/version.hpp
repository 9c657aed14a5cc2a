#pragma once

namespace cpcal {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace cpcal
