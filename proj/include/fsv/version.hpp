#pragma once

namespace fsv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fsv
