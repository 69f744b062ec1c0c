#pragma once

#include <stdexcept>
#include <string>

namespace rayloc {

/// Malformed input file (JSON syntax, missing fields, bad CSV row).
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally well-formed input that violates a documented invariant.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure (missing file, unwritable directory).
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Geometric degeneracy that makes a result undefined (e.g. the three-point
/// fix when the observer lies on the circle through all three base stations).
class degenerate_geometry_error : public validation_error {
public:
    explicit degenerate_geometry_error(const std::string& what) : validation_error(what) {}
};

}  // namespace rayloc
