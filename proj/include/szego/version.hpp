#pragma once

namespace szego {

inline constexpr const char* version = "0.1.0";

}  // namespace szego
