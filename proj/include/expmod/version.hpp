#pragma once

namespace expmod {

inline constexpr const char* version = "1.0.0";

// Output schema tag appended to every table this library emits. Bump when
// column layouts change so downstream parsers can dispatch on it.
inline constexpr const char* schema_version = "v1";

}  // namespace expmod
