#pragma once

namespace wqf {

inline constexpr const char* kVersion = "0.1.0";

} // namespace wqf
