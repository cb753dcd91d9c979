#pragma once

namespace trustshape {

inline constexpr const char* kVersion = "0.1.0";

}
