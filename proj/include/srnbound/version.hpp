#pragma once

namespace srnbound {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace srnbound
