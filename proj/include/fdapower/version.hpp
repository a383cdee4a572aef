#pragma once

namespace fdapower {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fdapower
