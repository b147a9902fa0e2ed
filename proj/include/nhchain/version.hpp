#pragma once

namespace nhchain {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nhchain
