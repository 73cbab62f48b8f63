#pragma once

namespace endodiff {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolkitName = "endodiff";

inline const char* version_string() { return "endodiff 0.1.0"; }

} // namespace endodiff
