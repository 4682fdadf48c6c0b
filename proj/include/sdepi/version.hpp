#pragma once

namespace sdepi {
inline constexpr const char* kVersion = "1.0.0";
}
