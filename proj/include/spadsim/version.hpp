#pragma once

namespace spadsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spadsim
