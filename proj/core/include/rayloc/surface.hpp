#pragma once

#include <string>
#include <vector>

#include "rayloc/vec3.hpp"

namespace rayloc {

/// Self-intersection guard distance [m]; a ray relaunched from an
/// interaction point ignores hits closer than this.
inline constexpr double kEpsHit = 1e-9;

/// Point-in-polygon and coplanarity tolerance [m].
inline constexpr double kEpsSurface = 1e-9;

/// Default through-material attenuation [dB].
inline constexpr double kDefaultTransmissionLossDb = 7.2;

/// A planar convex polygon obstruction. Zero thickness, two-sided:
/// both faces reflect, and a ray may pass through at a fixed
/// per-surface transmission loss. Throws validation_error if the
/// vertices are non-coplanar (>1e-9 m), fewer than 3, or not strictly
/// convex.
class Surface {
public:
    Surface(std::string id, std::vector<Vec3> vertices, std::string material_id = "default",
            double transmission_loss_db = kDefaultTransmissionLossDb);

    const std::string& id() const { return id_; }
    const std::string& material_id() const { return material_id_; }
    double transmission_loss_db() const { return transmission_loss_db_; }
    const std::vector<Vec3>& vertices() const { return vertices_; }

    /// Unit normal of the supporting plane (orientation is arbitrary;
    /// surfaces are two-sided).
    const Vec3& normal() const { return normal_; }

    /// Signed distance from p to the supporting plane.
    double signed_distance(const Vec3& p) const { return normal_.dot(p) - plane_offset_; }

    /// Mirror image of p across the supporting plane.
    Vec3 mirror_point(const Vec3& p) const {
        return p - 2.0 * signed_distance(p) * normal_;
    }

    /// Whether an in-plane point lies inside the polygon (boundary
    /// inclusive, tolerance kEpsSurface).
    bool contains_point(const Vec3& p) const;

    Aabb bounding_box() const;

private:
    std::string id_;
    std::string material_id_;
    double transmission_loss_db_;
    std::vector<Vec3> vertices_;
    Vec3 normal_;
    double plane_offset_ = 0.0;
    // Per-edge in-plane inward normals, unit length, for the convex
    // point-in-polygon test.
    std::vector<Vec3> edge_normals_;
};

struct RayHit {
    Vec3 point;
    double distance = 0.0;
};

/// Nearest intersection of the half-line (origin, direction) with the
/// polygon, strictly beyond the origin (distance > kEpsHit). Direction
/// must be unit length. Returns false if the ray misses.
bool intersect_surface(const Vec3& origin, const Vec3& direction, const Surface& surface,
                       RayHit& hit);

}  // namespace rayloc
