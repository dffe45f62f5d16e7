#pragma once

namespace hsps {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace hsps
