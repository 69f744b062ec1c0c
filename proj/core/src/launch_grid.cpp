#include "rayloc/launch_grid.hpp"

#include <array>
#include <map>

#include "rayloc/errors.hpp"

namespace rayloc {

namespace {

struct IcosahedronBase {
    std::array<Vec3, 12> vertices;
    std::array<std::array<int, 3>, 20> faces;
};

IcosahedronBase icosahedron() {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    IcosahedronBase base;
    const Vec3 raw[12] = {
        {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1},
    };
    for (int i = 0; i < 12; ++i) base.vertices[i] = raw[i].normalized();
    base.faces = {{{0, 11, 5},  {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                   {1, 5, 9},   {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                   {3, 9, 4},   {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                   {4, 9, 5},   {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}}};
    return base;
}

}  // namespace

LaunchGrid launch_directions(int tessellation_factor) {
    if (tessellation_factor < 1)
        throw validation_error("tessellation factor must be >= 1");
    const int n = tessellation_factor;
    const IcosahedronBase base = icosahedron();

    LaunchGrid grid;
    grid.tessellation_factor = n;
    grid.directions.reserve(static_cast<std::size_t>(10 * n * n + 2));

    // Dedup key: corners and edge points are shared between faces and
    // must be emitted exactly once. (0,corner,_,_), (1,cornerA,cornerB,
    // step from A with A<B), (2,face,i,j) for interior points.
    std::map<std::array<int, 4>, int> seen;

    auto emit = [&](const std::array<int, 4>& key, const Vec3& p) {
        if (seen.emplace(key, static_cast<int>(grid.directions.size())).second)
            grid.directions.push_back(p.normalized());
    };

    for (int f = 0; f < 20; ++f) {
        const auto& face = base.faces[static_cast<std::size_t>(f)];
        const Vec3& a = base.vertices[static_cast<std::size_t>(face[0])];
        const Vec3& b = base.vertices[static_cast<std::size_t>(face[1])];
        const Vec3& c = base.vertices[static_cast<std::size_t>(face[2])];
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n - i; ++j) {
                const Vec3 p = (a * static_cast<double>(n - i - j) + b * static_cast<double>(i) +
                                c * static_cast<double>(j)) /
                               static_cast<double>(n);
                std::array<int, 4> key{};
                if (i == 0 && j == 0) key = {0, face[0], 0, 0};
                else if (i == n) key = {0, face[1], 0, 0};
                else if (j == n) key = {0, face[2], 0, 0};
                else if (j == 0) key = face[0] < face[1]
                                           ? std::array<int, 4>{1, face[0], face[1], i}
                                           : std::array<int, 4>{1, face[1], face[0], n - i};
                else if (i == 0) key = face[0] < face[2]
                                           ? std::array<int, 4>{1, face[0], face[2], j}
                                           : std::array<int, 4>{1, face[2], face[0], n - j};
                else if (i + j == n) key = face[1] < face[2]
                                               ? std::array<int, 4>{1, face[1], face[2], j}
                                               : std::array<int, 4>{1, face[2], face[1], n - j};
                else key = {2, f, i, j};
                emit(key, p);
            }
        }
    }

    return grid;
}

}  // namespace rayloc
