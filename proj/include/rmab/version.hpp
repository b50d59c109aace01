#pragma once

namespace rmab {

inline constexpr const char kToolVersion[] = "1.0.0";

}  // namespace rmab
