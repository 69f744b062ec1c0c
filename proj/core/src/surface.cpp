#include "rayloc/surface.hpp"

#include <cmath>
#include <utility>

#include "rayloc/errors.hpp"

namespace rayloc {

namespace {

// Newell's method: robust polygon normal, oriented by winding order.
Vec3 newell_normal(const std::vector<Vec3>& verts) {
    Vec3 n;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const Vec3& a = verts[i];
        const Vec3& b = verts[(i + 1) % verts.size()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    return n;
}

}  // namespace

Surface::Surface(std::string id, std::vector<Vec3> vertices, std::string material_id,
                 double transmission_loss_db)
    : id_(std::move(id)),
      material_id_(std::move(material_id)),
      transmission_loss_db_(transmission_loss_db),
      vertices_(std::move(vertices)) {
    if (id_.empty()) throw validation_error("surface with empty id");
    if (vertices_.size() < 3)
        throw validation_error("surface '" + id_ + "': fewer than 3 vertices");
    if (transmission_loss_db_ < 0.0)
        throw validation_error("surface '" + id_ + "': negative transmission loss");

    const Vec3 raw = newell_normal(vertices_);
    const double raw_norm = raw.norm();
    if (raw_norm < 1e-18)
        throw validation_error("surface '" + id_ + "': vertices are collinear");
    normal_ = raw / raw_norm;

    plane_offset_ = 0.0;
    for (const Vec3& v : vertices_) plane_offset_ += normal_.dot(v);
    plane_offset_ /= static_cast<double>(vertices_.size());

    for (const Vec3& v : vertices_) {
        if (std::fabs(normal_.dot(v) - plane_offset_) > kEpsSurface)
            throw validation_error("surface '" + id_ + "': vertices not coplanar");
    }

    // Strict convexity with winding consistent with the Newell normal;
    // also precompute the unit in-plane inward edge normals used by
    // contains_point.
    const std::size_t n = vertices_.size();
    edge_normals_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& a = vertices_[i];
        const Vec3& b = vertices_[(i + 1) % n];
        const Vec3& c = vertices_[(i + 2) % n];
        const Vec3 e1 = b - a;
        const Vec3 e2 = c - b;
        const double turn = e1.cross(e2).dot(normal_);
        if (turn <= 1e-12 * e1.norm() * e2.norm())
            throw validation_error("surface '" + id_ + "': polygon not strictly convex");
        edge_normals_.push_back(normal_.cross(e1).normalized());
    }
}

bool Surface::contains_point(const Vec3& p) const {
    // Edge normals are perpendicular to the plane normal, so any
    // out-of-plane component of p is ignored implicitly.
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((p - vertices_[i]).dot(edge_normals_[i]) < -kEpsSurface) return false;
    }
    return true;
}

Aabb Surface::bounding_box() const {
    Aabb box{vertices_[0], vertices_[0]};
    for (const Vec3& v : vertices_) box.expand(v);
    return box;
}

bool intersect_surface(const Vec3& origin, const Vec3& direction, const Surface& surface,
                       RayHit& hit) {
    const double denom = direction.dot(surface.normal());
    if (std::fabs(denom) < 1e-15) return false;  // parallel or in-plane
    const double t = -surface.signed_distance(origin) / denom;
    if (t <= kEpsHit) return false;
    const Vec3 p = origin + t * direction;
    if (!surface.contains_point(p)) return false;
    hit.point = p;
    hit.distance = t;
    return true;
}

}  // namespace rayloc
