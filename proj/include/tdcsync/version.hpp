#pragma once

namespace tdcsync {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kTableVersion = 1;

}  // namespace tdcsync
