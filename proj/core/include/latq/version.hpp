#pragma once

#include <cstdint>

namespace latq {

inline constexpr const char* kVersionString = "1.0.0";

// On-disk artifact format version (see pipeline.hpp).
inline constexpr std::uint16_t kFormatVersion = 1;

}  // namespace latq
