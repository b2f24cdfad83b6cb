#pragma once

namespace pvs {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace pvs
