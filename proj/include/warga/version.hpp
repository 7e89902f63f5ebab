#pragma once

namespace warga {

inline constexpr const char* kVersion = "warga 0.1.0";

}  // namespace warga
