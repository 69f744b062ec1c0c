#include "rayloc/indoor_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

#include "rayloc/errors.hpp"

namespace rayloc {

IndoorMap::IndoorMap(std::string name, std::vector<Surface> surfaces,
                     std::optional<Aabb> bounds)
    : name_(std::move(name)), surfaces_(std::move(surfaces)) {
    std::unordered_set<std::string> seen;
    for (const Surface& s : surfaces_) {
        if (!seen.insert(s.id()).second)
            throw validation_error("map '" + name_ + "': duplicate surface id '" + s.id() + "'");
    }

    if (surfaces_.empty()) {
        if (!bounds)
            throw validation_error("map '" + name_ +
                                   "': no surfaces and no explicit bounds");
        bounds_ = *bounds;
    } else {
        Aabb tight = surfaces_[0].bounding_box();
        for (const Surface& s : surfaces_)
            for (const Vec3& v : s.vertices()) tight.expand(v);
        if (bounds) {
            if (!bounds->contains_box(tight))
                throw validation_error("map '" + name_ +
                                       "': explicit bounds do not contain the surfaces");
            bounds_ = *bounds;
        } else {
            // Derived bounds get a workspace pad so endpoints near (or
            // on the far side of) a lone surface still count as inside;
            // a tight box would make thin fixture maps unusable.
            const Vec3 pad{kDerivedBoundsPadM, kDerivedBoundsPadM, kDerivedBoundsPadM};
            bounds_ = Aabb{tight.min - pad, tight.max + pad};
        }
    }

    if (bounds_.min.x > bounds_.max.x || bounds_.min.y > bounds_.max.y ||
        bounds_.min.z > bounds_.max.z)
        throw validation_error("map '" + name_ + "': inverted bounds");
}

int IndoorMap::find_surface(const std::string& id) const {
    for (std::size_t i = 0; i < surfaces_.size(); ++i)
        if (surfaces_[i].id() == id) return static_cast<int>(i);
    return -1;
}

int nearest_intersection(const IndoorMap& map, const Vec3& origin, const Vec3& direction,
                         double max_distance, int exclude, RayHit& hit) {
    int best = -1;
    double best_dist = max_distance;
    RayHit h;
    const auto& surfaces = map.surfaces();
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        if (static_cast<int>(i) == exclude) continue;
        if (!intersect_surface(origin, direction, surfaces[i], h)) continue;
        if (h.distance <= best_dist) {
            // Strict < keeps the lowest index on exact ties.
            if (h.distance == best_dist && best != -1) continue;
            best = static_cast<int>(i);
            best_dist = h.distance;
            hit = h;
        }
    }
    return best;
}

std::vector<SegmentCrossing> segment_crossings(const IndoorMap& map, const Vec3& a,
                                               const Vec3& b) {
    std::vector<SegmentCrossing> out;
    const Vec3 d = b - a;
    const double len = d.norm();
    if (len <= 2.0 * kEpsHit) return out;
    const Vec3 dir = d / len;
    RayHit h;
    const auto& surfaces = map.surfaces();
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        if (!intersect_surface(a, dir, surfaces[i], h)) continue;
        if (h.distance >= len - kEpsHit) continue;
        out.push_back({static_cast<int>(i), h.distance, h.point});
    }
    std::sort(out.begin(), out.end(), [](const SegmentCrossing& x, const SegmentCrossing& y) {
        if (x.distance != y.distance) return x.distance < y.distance;
        return x.surface < y.surface;
    });
    return out;
}

double bounding_box_exit(const Aabb& box, const Vec3& origin, const Vec3& direction) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {direction.x, direction.y, direction.z};
    const double lo[3] = {box.min.x, box.min.y, box.min.z};
    const double hi[3] = {box.max.x, box.max.y, box.max.z};
    for (int i = 0; i < 3; ++i) {
        if (std::fabs(d[i]) < 1e-300) {
            if (o[i] < lo[i] || o[i] > hi[i]) return 0.0;
            continue;
        }
        double t0 = (lo[i] - o[i]) / d[i];
        double t1 = (hi[i] - o[i]) / d[i];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
    }
    if (tmax < std::max(tmin, 0.0)) return 0.0;
    return tmax;
}

}  // namespace rayloc
