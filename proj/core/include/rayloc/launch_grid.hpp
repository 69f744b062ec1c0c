#pragma once

#include <vector>

#include "rayloc/vec3.hpp"

namespace rayloc {

/// Quasi-uniform launch directions: the vertex directions of an
/// icosahedron whose faces are subdivided N-fold (geodesic frequency N).
struct LaunchGrid {
    int tessellation_factor = 1;
    std::vector<Vec3> directions;  // 10*N^2 + 2 unit vectors, no duplicates
};

/// Build the launch grid for tessellation factor N >= 1. The mean
/// angular separation between neighboring directions is ~69/N degrees.
/// Throws validation_error for N < 1.
LaunchGrid launch_directions(int tessellation_factor);

}  // namespace rayloc
