#pragma once

#include <cmath>

namespace rayloc {

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299'792'458.0;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// 3-D vector; positions in meters, directions unit-length.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    constexpr double norm2() const { return dot(*this); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
    double distance_to(const Vec3& o) const { return (*this - o).norm(); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Azimuth/elevation pair [rad]. Azimuth in (-pi, pi] measured in the
/// xy-plane from +x toward +y; elevation in [-pi/2, pi/2] from the
/// xy-plane toward +z.
struct AzEl {
    double azimuth = 0.0;
    double elevation = 0.0;
};

inline AzEl direction_to_azel(const Vec3& d) {
    const double n = d.norm();
    return {std::atan2(d.y, d.x), std::asin(d.z / n)};
}

inline Vec3 azel_to_direction(const AzEl& a) {
    const double ce = std::cos(a.elevation);
    return {ce * std::cos(a.azimuth), ce * std::sin(a.azimuth), std::sin(a.elevation)};
}

/// Specular reflection of unit direction `d` at a plane with unit normal `n`.
/// The incident and reflected directions make equal angles with the normal
/// and are coplanar with it.
inline Vec3 reflect_direction(const Vec3& d, const Vec3& n) {
    return d - 2.0 * d.dot(n) * n;
}

/// Axis-aligned bounding box.
struct Aabb {
    Vec3 min;
    Vec3 max;

    bool contains(const Vec3& p, double eps = 0.0) const {
        return p.x >= min.x - eps && p.x <= max.x + eps && p.y >= min.y - eps &&
               p.y <= max.y + eps && p.z >= min.z - eps && p.z <= max.z + eps;
    }
    bool contains_box(const Aabb& o, double eps = 1e-9) const {
        return contains(o.min, eps) && contains(o.max, eps);
    }
    void expand(const Vec3& p) {
        min.x = std::fmin(min.x, p.x);
        min.y = std::fmin(min.y, p.y);
        min.z = std::fmin(min.z, p.z);
        max.x = std::fmax(max.x, p.x);
        max.y = std::fmax(max.y, p.y);
        max.z = std::fmax(max.z, p.z);
    }
};

}  // namespace rayloc
