#pragma once

namespace kaidoa {

inline constexpr const char* version = "0.1.0";

}  // namespace kaidoa
