#pragma once

namespace mflk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mflk
