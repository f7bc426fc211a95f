#pragma once

namespace postsel {
inline constexpr const char* kVersion = "0.1.0";
}
