#pragma once

#include <iosfwd>
#include <string>

#include "rayloc/indoor_map.hpp"

namespace rayloc {

/// Parse and validate a map document (JSON, units must be "meters").
/// Throws parse_error on malformed input and validation_error on
/// invariant violations; both name the offending surface where one is
/// involved.
IndoorMap load_map(std::istream& in);
IndoorMap load_map_string(const std::string& text);
IndoorMap load_map_file(const std::string& path);

/// Serialize back to the map document format. load -> save -> load is a
/// fixed point.
std::string save_map(const IndoorMap& map);
void save_map_file(const IndoorMap& map, const std::string& path);

}  // namespace rayloc
