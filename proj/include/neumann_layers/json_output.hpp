#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace nlayers {

inline constexpr const char* kLibraryVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// Serializes with every floating-point number printed at 17 significant digits,
// so identical inputs give byte-identical files.
std::string dump_fixed(const Json& value, int indent = 2);

// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace nlayers
