#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rayloc/surface.hpp"
#include "rayloc/vec3.hpp"

namespace rayloc {

/// Workspace margin added to bounds derived from surface vertices.
inline constexpr double kDerivedBoundsPadM = 2.0;

/// Immutable collection of surfaces plus axis-aligned bounds; the shared
/// environment for tracing and localization. Safe to share read-only
/// across threads.
///
/// Unless given explicitly, bounds are the surface vertices' box padded
/// by kDerivedBoundsPadM (so endpoints beside a thin map still count as
/// inside). Explicit bounds must contain the surfaces, and are required
/// when the surface list is empty (free-space maps used in tests).
class IndoorMap {
public:
    explicit IndoorMap(std::string name, std::vector<Surface> surfaces,
                       std::optional<Aabb> bounds = std::nullopt);

    const std::string& name() const { return name_; }
    const std::vector<Surface>& surfaces() const { return surfaces_; }
    const Aabb& bounding_box() const { return bounds_; }

    const Surface& surface(int index) const { return surfaces_[static_cast<size_t>(index)]; }

    /// Index of the surface with the given id, or -1.
    int find_surface(const std::string& id) const;

    bool contains(const Vec3& p, double eps = 1e-9) const { return bounds_.contains(p, eps); }

private:
    std::string name_;
    std::vector<Surface> surfaces_;
    Aabb bounds_;
};

/// Nearest surface hit by the half-line (origin, direction), distance in
/// (kEpsHit, max_distance]. `exclude` skips one surface index (the one
/// the ray just interacted with). Returns surface index or -1.
int nearest_intersection(const IndoorMap& map, const Vec3& origin, const Vec3& direction,
                         double max_distance, int exclude, RayHit& hit);

/// All surfaces crossed strictly between the segment endpoints
/// (distance in (kEpsHit, |b-a| - kEpsHit)), ordered by distance from a.
struct SegmentCrossing {
    int surface = -1;
    double distance = 0.0;
    Vec3 point;
};
std::vector<SegmentCrossing> segment_crossings(const IndoorMap& map, const Vec3& a,
                                               const Vec3& b);

/// Distance from `origin` along `direction` to the exit of the bounding
/// box, or 0 if the ray never passes through it.
double bounding_box_exit(const Aabb& box, const Vec3& origin, const Vec3& direction);

}  // namespace rayloc
