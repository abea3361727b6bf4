#pragma once

namespace nldisp {

inline constexpr const char* version = "0.1.0";

}  // namespace nldisp
