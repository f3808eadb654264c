#pragma once

namespace risklab {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace risklab
