#pragma once

namespace bistab {
inline constexpr const char* kVersion = "0.1.0";
}
