#pragma once

namespace srms {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace srms
