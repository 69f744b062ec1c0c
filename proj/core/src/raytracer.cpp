#include "rayloc/raytracer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "detail/parallel.hpp"
#include "rayloc/errors.hpp"
#include "rayloc/launch_grid.hpp"

namespace rayloc {

void TraceConfig::validate() const {
    if (!(frequency_hz > 0.0)) throw validation_error("trace config: frequency must be > 0");
    if (max_reflections < 0) throw validation_error("trace config: max_reflections < 0");
    if (max_transmissions < 0) throw validation_error("trace config: max_transmissions < 0");
    if (tessellation_factor < 1)
        throw validation_error("trace config: tessellation_factor must be >= 1");
    if (!(capture_alpha > 0.0))
        throw validation_error("trace config: capture_alpha must be > 0");
    if (threads < 0) throw validation_error("trace config: threads < 0");
    if (!std::isfinite(tx_power_dbm) || !std::isfinite(min_power_dbm))
        throw validation_error("trace config: powers must be finite");
}

int MultipathComponent::reflection_count() const {
    int n = 0;
    for (const auto& e : interactions)
        if (e.kind == InteractionKind::reflection) ++n;
    return n;
}

int MultipathComponent::transmission_count() const {
    int n = 0;
    for (const auto& e : interactions)
        if (e.kind == InteractionKind::transmission) ++n;
    return n;
}

double reflection_coefficient(double theta_i_rad) {
    if (theta_i_rad < -1e-12 || theta_i_rad > kPi / 2.0 + 1e-12)
        throw validation_error("reflection coefficient: incidence angle outside [0, pi/2]");
    const double g = 0.56 * theta_i_rad + 0.096;
    return std::clamp(g, 0.0, 1.0);
}

double fspl_db(double distance_m, double frequency_hz) {
    if (!(distance_m > 0.0)) throw validation_error("fspl: distance must be > 0");
    if (!(frequency_hz > 0.0)) throw validation_error("fspl: frequency must be > 0");
    return 20.0 * std::log10(4.0 * kPi * distance_m * frequency_hz / kSpeedOfLight);
}

double path_power_dbm(const TraceConfig& cfg, double path_length_m,
                      std::span<const double> reflection_angles_rad,
                      std::span<const double> transmission_losses_db) {
    double p = cfg.tx_power_dbm - fspl_db(path_length_m, cfg.frequency_hz);
    for (double theta : reflection_angles_rad) {
        const double g = reflection_coefficient(theta);
        if (g <= 0.0) return -std::numeric_limits<double>::infinity();
        p += 20.0 * std::log10(g);
    }
    for (double loss : transmission_losses_db) p -= loss;
    return p;
}

namespace {

// Exact polyline for a reflection sequence via the method of images:
// mirror RX back through the reflecting planes, then walk forward from
// TX, bouncing at the plane crossing toward each mirrored target.
// Fails (nullopt) when a segment does not properly cross its plane or
// the bounce point lands outside the polygon.
std::optional<std::vector<Vec3>> polyline_for_reflections(const IndoorMap& map, const Vec3& tx,
                                                          const Vec3& rx,
                                                          const std::vector<int>& reflections) {
    const std::size_t m = reflections.size();
    // targets[j] is RX mirrored through reflections j..m-1.
    std::vector<Vec3> targets(m + 1);
    targets[m] = rx;
    for (std::size_t j = m; j-- > 0;)
        targets[j] = map.surface(reflections[j]).mirror_point(targets[j + 1]);

    std::vector<Vec3> verts;
    verts.reserve(m + 2);
    verts.push_back(tx);
    Vec3 current = tx;
    for (std::size_t j = 0; j < m; ++j) {
        const Surface& s = map.surface(reflections[j]);
        // March toward targets[j], the RX image mirrored through this
        // surface (and all later ones); the bounce point is where that
        // segment crosses the plane. Grazing or same-side geometry has
        // no specular solution.
        const double s_cur = s.signed_distance(current);
        const double s_tgt = s.signed_distance(targets[j]);
        if (s_cur * s_tgt >= 0.0 || std::fabs(s_cur) <= kEpsHit || std::fabs(s_tgt) <= kEpsHit)
            return std::nullopt;
        const double u = s_cur / (s_cur - s_tgt);
        const Vec3 p = current + u * (targets[j] - current);
        if (!s.contains_point(p)) return std::nullopt;
        verts.push_back(p);
        current = p;
    }
    verts.push_back(rx);

    for (std::size_t i = 0; i + 1 < verts.size(); ++i)
        if ((verts[i + 1] - verts[i]).norm() <= kEpsHit) return std::nullopt;
    return verts;
}

// Surfaces crossed by each polyline segment, excluding each segment's
// own bounce surfaces (they sit at the endpoints, outside the interior
// window of segment_crossings).
std::vector<std::vector<SegmentCrossing>> crossings_per_segment(const IndoorMap& map,
                                                                const std::vector<Vec3>& verts) {
    std::vector<std::vector<SegmentCrossing>> out;
    out.reserve(verts.size() - 1);
    for (std::size_t i = 0; i + 1 < verts.size(); ++i)
        out.push_back(segment_crossings(map, verts[i], verts[i + 1]));
    return out;
}

struct RefinedPath {
    std::vector<Vec3> vertices;
    Signature signature;          // reflections + actual crossings, in path order
    double path_length_m = 0.0;
    std::vector<double> reflection_angles;
    std::vector<double> transmission_losses;
};

// Turn a reflection sequence into the full component geometry: exact
// polyline, then every surface the segments actually cross becomes a
// transmission. Returns nullopt when the geometry fails or a cap is
// exceeded.
std::optional<RefinedPath> refine_reflection_sequence(const IndoorMap& map, const Vec3& tx,
                                                      const Vec3& rx,
                                                      const std::vector<int>& reflections,
                                                      const TraceConfig& cfg) {
    if (static_cast<int>(reflections.size()) > cfg.max_reflections) return std::nullopt;
    auto verts = polyline_for_reflections(map, tx, rx, reflections);
    if (!verts) return std::nullopt;

    const auto crossings = crossings_per_segment(map, *verts);
    std::size_t n_trans = 0;
    for (const auto& seg : crossings) n_trans += seg.size();
    if (static_cast<int>(n_trans) > cfg.max_transmissions) return std::nullopt;

    RefinedPath path;
    path.vertices = *verts;
    path.reflection_angles.reserve(reflections.size());
    path.transmission_losses.reserve(n_trans);

    for (std::size_t seg = 0; seg + 1 < verts->size(); ++seg) {
        path.path_length_m += ((*verts)[seg + 1] - (*verts)[seg]).norm();
        for (const SegmentCrossing& c : crossings[seg]) {
            const Surface& s = map.surface(c.surface);
            path.signature.push_back({s.id(), InteractionKind::transmission});
            path.transmission_losses.push_back(s.transmission_loss_db());
        }
        if (seg + 2 < verts->size()) {
            const Surface& s = map.surface(reflections[seg]);
            const Vec3 d = ((*verts)[seg + 1] - (*verts)[seg]).normalized();
            const double c = std::clamp(std::fabs(d.dot(s.normal())), 0.0, 1.0);
            path.reflection_angles.push_back(std::acos(c));
            path.signature.push_back({s.id(), InteractionKind::reflection});
        }
    }
    return path;
}

struct SbrContext {
    const IndoorMap& map;
    const TraceConfig& cfg;
    Vec3 tx;
    Vec3 rx;
    double capture_per_meter = 0.0;  // alpha * gamma / 2
};

// Depth-first branch walk from one launch direction. Each segment is
// tested against the reception sphere; captures record the reflection
// sequence so far (transmissions do not change the polyline geometry,
// so refinement reconstructs them from the exact path).
void walk_branch(const SbrContext& ctx, const Vec3& origin, const Vec3& dir,
                 double length_so_far, double loss_db, int last_surface, int n_refl,
                 int n_trans, std::vector<int>& refl_seq,
                 std::vector<std::vector<int>>& captured) {
    RayHit hit;
    const int hit_surface =
        nearest_intersection(ctx.map, origin, dir, std::numeric_limits<double>::infinity(),
                             last_surface, hit);
    double seg_len;
    if (hit_surface >= 0) {
        seg_len = hit.distance;
    } else {
        seg_len = bounding_box_exit(ctx.map.bounding_box(), origin, dir);
        if (seg_len <= 0.0) return;
    }

    const Vec3 to_rx = ctx.rx - origin;
    const double foot = std::clamp(to_rx.dot(dir), 0.0, seg_len);
    const double perp = (to_rx - foot * dir).norm();
    if (perp <= ctx.capture_per_meter * (length_so_far + foot)) captured.push_back(refl_seq);

    if (hit_surface < 0) return;

    const Surface& s = ctx.map.surface(hit_surface);
    const double length_at_hit = length_so_far + hit.distance;
    // Any continuation is at least this long, so FSPL at the hit bounds
    // the final power from above; branches that can no longer reach the
    // floor are dead.
    const double fspl_bound = fspl_db(std::max(length_at_hit, 1e-3), ctx.cfg.frequency_hz);

    if (n_refl < ctx.cfg.max_reflections) {
        const double cos_theta = std::clamp(std::fabs(dir.dot(s.normal())), 0.0, 1.0);
        const double gamma = reflection_coefficient(std::acos(cos_theta));
        if (gamma > 0.0) {
            const double new_loss = loss_db - 20.0 * std::log10(gamma);
            if (ctx.cfg.tx_power_dbm - fspl_bound - new_loss >= ctx.cfg.min_power_dbm) {
                refl_seq.push_back(hit_surface);
                walk_branch(ctx, hit.point, reflect_direction(dir, s.normal()), length_at_hit,
                            new_loss, hit_surface, n_refl + 1, n_trans, refl_seq, captured);
                refl_seq.pop_back();
            }
        }
    }

    if (n_trans < ctx.cfg.max_transmissions) {
        const double new_loss = loss_db + s.transmission_loss_db();
        if (ctx.cfg.tx_power_dbm - fspl_bound - new_loss >= ctx.cfg.min_power_dbm) {
            walk_branch(ctx, hit.point, dir, length_at_hit, new_loss, hit_surface, n_refl,
                        n_trans + 1, refl_seq, captured);
        }
    }
}

}  // namespace

std::optional<std::vector<Vec3>> refine_path(const IndoorMap& map, const Vec3& tx,
                                             const Vec3& rx, const Signature& signature) {
    std::vector<int> reflections;
    for (const SignatureEntry& e : signature) {
        const int idx = map.find_surface(e.surface_id);
        if (idx < 0)
            throw validation_error("refine_path: unknown surface id '" + e.surface_id + "'");
        if (e.kind == InteractionKind::reflection) reflections.push_back(idx);
    }

    auto verts = polyline_for_reflections(map, tx, rx, reflections);
    if (!verts) return std::nullopt;

    // The listed transmissions must match the segments' actual
    // crossings, id for id, in path order.
    const auto crossings = crossings_per_segment(map, *verts);
    std::size_t seg = 0;
    std::size_t pos = 0;  // next unmatched crossing within segment `seg`
    for (const SignatureEntry& e : signature) {
        if (e.kind == InteractionKind::reflection) {
            if (pos != crossings[seg].size()) return std::nullopt;  // unlisted crossing
            ++seg;
            pos = 0;
            continue;
        }
        if (pos >= crossings[seg].size()) return std::nullopt;  // listed but not crossed
        if (map.surface(crossings[seg][pos].surface).id() != e.surface_id) return std::nullopt;
        ++pos;
    }
    if (pos != crossings[seg].size()) return std::nullopt;

    return verts;
}

std::vector<MultipathComponent> trace(const IndoorMap& map, const Vec3& tx, const Vec3& rx,
                                      const TraceConfig& cfg) {
    cfg.validate();
    if (!map.contains(tx)) throw validation_error("trace: tx outside map bounds");
    if (!map.contains(rx)) throw validation_error("trace: rx outside map bounds");
    if ((rx - tx).norm() <= kEpsHit) throw validation_error("trace: tx and rx coincide");

    const LaunchGrid grid = launch_directions(cfg.tessellation_factor);
    const double gamma_rad = deg_to_rad(69.0 / cfg.tessellation_factor);

    SbrContext ctx{map, cfg, tx, rx, cfg.capture_alpha * gamma_rad / 2.0};

    std::vector<std::vector<std::vector<int>>> captured(grid.directions.size());
    detail::parallel_for(grid.directions.size(), cfg.threads,
                         [&](std::size_t begin, std::size_t end) {
                             std::vector<int> seq;
                             for (std::size_t i = begin; i < end; ++i)
                                 walk_branch(ctx, tx, grid.directions[i], 0.0, 0.0, -1, 0, 0,
                                             seq, captured[i]);
                         });

    // Lexicographic set ordering keeps refinement order deterministic.
    std::set<std::vector<int>> sequences;
    sequences.insert({});  // the direct line is always a candidate
    // Sweep every single-reflection image unconditionally: the reception
    // sphere's inscribed radius (alpha = 1) cannot cover directions near
    // grid-triangle centers, and first-order paths are too important to
    // lose to that gap. Refinement discards the infeasible ones.
    if (cfg.max_reflections >= 1)
        for (std::size_t i = 0; i < map.surfaces().size(); ++i)
            sequences.insert({static_cast<int>(i)});
    for (auto& per_launch : captured)
        for (auto& seq : per_launch) sequences.insert(std::move(seq));

    std::map<std::string, MultipathComponent> components;
    for (const auto& seq : sequences) {
        auto refined = refine_reflection_sequence(map, tx, rx, seq, cfg);
        if (!refined) continue;
        const double power =
            path_power_dbm(cfg, refined->path_length_m, refined->reflection_angles,
                           refined->transmission_losses);
        if (power < cfg.min_power_dbm) continue;

        MultipathComponent comp;
        comp.aod = direction_to_azel(refined->vertices[1] - refined->vertices[0]);
        const std::size_t n = refined->vertices.size();
        comp.aoa = direction_to_azel(refined->vertices[n - 2] - refined->vertices[n - 1]);
        comp.path_length_m = refined->path_length_m;
        comp.tof_s = refined->path_length_m / kSpeedOfLight;
        comp.received_power_dbm = power;
        comp.interactions = std::move(refined->signature);
        comp.vertices = std::move(refined->vertices);
        components.emplace(signature_to_string(comp.interactions), std::move(comp));
    }

    std::vector<MultipathComponent> out;
    out.reserve(components.size());
    for (auto& [key, comp] : components) out.push_back(std::move(comp));
    std::sort(out.begin(), out.end(), [](const MultipathComponent& a, const MultipathComponent& b) {
        if (a.tof_s != b.tof_s) return a.tof_s < b.tof_s;
        return signature_to_string(a.interactions) < signature_to_string(b.interactions);
    });
    return out;
}

bool line_of_sight(const IndoorMap& map, const Vec3& tx, const Vec3& rx) {
    return segment_crossings(map, tx, rx).empty();
}

}  // namespace rayloc
