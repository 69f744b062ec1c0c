#include "rayloc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "detail/union_find.hpp"
#include "rayloc/errors.hpp"

namespace rayloc {

void PathObservation::validate() const {
    if (bs_id.empty()) throw validation_error("observation: empty bs_id");
    if (!(tof_s > 0.0)) throw validation_error("observation '" + bs_id + "': tof must be > 0");
    if (!std::isfinite(angle.azimuth) || !std::isfinite(angle.elevation))
        throw validation_error("observation '" + bs_id + "': non-finite angle");
    if (std::fabs(angle.elevation) > kPi / 2.0 + 1e-9)
        throw validation_error("observation '" + bs_id + "': elevation outside [-pi/2, pi/2]");
    if (!std::isfinite(bs_position.x) || !std::isfinite(bs_position.y) ||
        !std::isfinite(bs_position.z))
        throw validation_error("observation '" + bs_id + "': non-finite position");
}

namespace {

// March one branch of the back-propagated ray until the length budget
// runs out. A surface hit inside the budget forks into a reflected and
// a transmitted continuation; past the interaction cap the branch dies
// (a ray cannot pass an obstruction without interacting with it).
void back_propagate(const IndoorMap& map, const PathObservation& obs, const Vec3& origin,
                    const Vec3& dir, double remaining, int used, int max_interactions,
                    int last_surface, Signature& sig, std::vector<CandidateLocation>& out) {
    RayHit hit;
    const int hit_surface = nearest_intersection(map, origin, dir, remaining, last_surface, hit);
    if (hit_surface < 0) {
        const Vec3 end = origin + dir * remaining;
        if (!map.contains(end, 1e-6)) return;  // user cannot be outside the map
        CandidateLocation cand;
        cand.position = end;
        cand.bs_id = obs.bs_id;
        cand.branch_signature = sig;
        cand.residual_length_m = 0.0;
        out.push_back(std::move(cand));
        return;
    }
    if (used >= max_interactions) return;

    const Surface& s = map.surface(hit_surface);
    const double left = remaining - hit.distance;

    sig.push_back({s.id(), InteractionKind::reflection});
    back_propagate(map, obs, hit.point, reflect_direction(dir, s.normal()), left, used + 1,
                   max_interactions, hit_surface, sig, out);
    sig.back().kind = InteractionKind::transmission;
    back_propagate(map, obs, hit.point, dir, left, used + 1, max_interactions, hit_surface, sig,
                   out);
    sig.pop_back();
}

// The estimate is the cluster backed by the most multipath components,
// so distinct observations rank first; raw member count only breaks
// ties (a branch forking just before its budget expires drops two
// near-coincident candidates, which must not count twice).
bool cluster_better(const ClusterEstimate& a, const ClusterEstimate& b) {
    if (a.distinct_observations != b.distinct_observations)
        return a.distinct_observations > b.distinct_observations;
    if (a.member_count != b.member_count) return a.member_count > b.member_count;
    if (a.rms_radius_m != b.rms_radius_m) return a.rms_radius_m < b.rms_radius_m;
    if (a.mean_residual_m != b.mean_residual_m) return a.mean_residual_m < b.mean_residual_m;
    if (a.centroid.x != b.centroid.x) return a.centroid.x < b.centroid.x;
    if (a.centroid.y != b.centroid.y) return a.centroid.y < b.centroid.y;
    return a.centroid.z < b.centroid.z;
}

}  // namespace

std::vector<CandidateLocation> generate_candidates(const IndoorMap& map,
                                                   const PathObservation& obs,
                                                   int max_interactions) {
    obs.validate();
    if (max_interactions < 0)
        throw validation_error("generate_candidates: max_interactions < 0");
    const double budget = kSpeedOfLight * obs.tof_s;
    std::vector<CandidateLocation> out;
    Signature sig;
    back_propagate(map, obs, obs.bs_position, azel_to_direction(obs.angle), budget, 0,
                   max_interactions, -1, sig, out);
    std::sort(out.begin(), out.end(), [](const CandidateLocation& a, const CandidateLocation& b) {
        return signature_to_string(a.branch_signature) < signature_to_string(b.branch_signature);
    });
    return out;
}

std::vector<ClusterEstimate> cluster_candidates(const std::vector<CandidateLocation>& candidates,
                                                double threshold_m) {
    if (!(threshold_m > 0.0))
        throw validation_error("cluster_candidates: threshold must be > 0");
    const std::size_t n = candidates.size();
    std::vector<ClusterEstimate> clusters;
    if (n == 0) return clusters;

    detail::UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (candidates[i].position.distance_to(candidates[j].position) <= threshold_m)
                uf.unite(i, j);

    // Group members in candidate order so centroids are summed in a
    // deterministic order.
    std::vector<std::size_t> root_of(n);
    std::vector<int> cluster_of_root(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        root_of[i] = uf.find(i);
        if (cluster_of_root[root_of[i]] < 0) {
            cluster_of_root[root_of[i]] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[static_cast<std::size_t>(cluster_of_root[root_of[i]])].members.push_back(
            candidates[i]);
    }

    for (ClusterEstimate& c : clusters) {
        c.member_count = static_cast<int>(c.members.size());
        Vec3 sum;
        for (const CandidateLocation& m : c.members) sum += m.position;
        c.centroid = sum / static_cast<double>(c.member_count);

        std::set<std::pair<std::string, int>> sources;
        double sq = 0.0, res = 0.0;
        for (const CandidateLocation& m : c.members) {
            sources.emplace(m.bs_id, m.observation_index);
            sq += m.position.distance_to(c.centroid) * m.position.distance_to(c.centroid);
            res += std::fabs(m.residual_length_m);
        }
        c.distinct_observations = static_cast<int>(sources.size());
        c.rms_radius_m = std::sqrt(sq / static_cast<double>(c.member_count));
        c.mean_residual_m = res / static_cast<double>(c.member_count);
    }

    std::sort(clusters.begin(), clusters.end(), cluster_better);
    return clusters;
}

LocateResult locate(const IndoorMap& map, const std::vector<PathObservation>& observations,
                    int max_interactions, double cluster_threshold_m) {
    if (observations.empty()) throw validation_error("locate: no observations");

    // A user is somewhere inside the building, so branches that end
    // outside the surfaces' own extent are spurious by construction.
    Aabb shell;
    bool have_shell = false;
    for (const Surface& s : map.surfaces()) {
        for (const Vec3& v : s.vertices()) {
            if (!have_shell) {
                shell = Aabb{v, v};
                have_shell = true;
            } else {
                shell.expand(v);
            }
        }
    }

    std::vector<CandidateLocation> pool;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        auto cands = generate_candidates(map, observations[i], max_interactions);
        for (CandidateLocation& c : cands) {
            if (have_shell && !shell.contains(c.position, 1e-9)) continue;
            c.observation_index = static_cast<int>(i);
            pool.push_back(std::move(c));
        }
    }
    if (pool.empty()) throw validation_error("locate: no feasible branch for any observation");
    std::sort(pool.begin(), pool.end(),
              [](const CandidateLocation& a, const CandidateLocation& b) {
                  if (a.bs_id != b.bs_id) return a.bs_id < b.bs_id;
                  if (a.observation_index != b.observation_index)
                      return a.observation_index < b.observation_index;
                  return signature_to_string(a.branch_signature) <
                         signature_to_string(b.branch_signature);
              });

    LocateResult result;
    result.candidate_count = static_cast<int>(pool.size());
    result.clusters = cluster_candidates(pool, cluster_threshold_m);
    result.position = result.clusters[0].centroid;
    result.ambiguous =
        observations.size() == 1 ||
        (result.clusters.size() >= 2 &&
         result.clusters[0].member_count == result.clusters[1].member_count &&
         result.clusters[0].distinct_observations == result.clusters[1].distinct_observations);
    return result;
}

std::vector<Vec3> three_point_fix(const std::array<Vec3, 3>& bs, double theta1, double theta2) {
    struct P2 {
        double x, y;
    };
    const P2 a{bs[0].x, bs[0].y}, b{bs[1].x, bs[1].y}, c{bs[2].x, bs[2].y};

    if (!(theta1 > 0.0 && theta1 < kPi) || !(theta2 > 0.0 && theta2 < kPi))
        throw validation_error("three_point_fix: angles must lie in (0, pi)");

    const auto dist2 = [](const P2& p, const P2& q) {
        return std::hypot(p.x - q.x, p.y - q.y);
    };
    const double ab = dist2(a, b);
    const double bc = dist2(b, c);
    if (ab < 1e-9 || bc < 1e-9)
        throw validation_error("three_point_fix: coincident base stations");
    const double scale = std::max({1.0, ab, bc});

    // Inscribed-angle locus of points seeing chord pq under angle theta:
    // two circles of radius |pq| / (2 sin theta), centered on the
    // perpendicular bisector at offset +-|pq| / (2 tan theta).
    struct Circle {
        P2 center;
        double r;
    };
    const auto loci = [&](const P2& p, const P2& q, double theta) {
        const double len = dist2(p, q);
        const double r = len / (2.0 * std::sin(theta));
        const double h = len / (2.0 * std::tan(theta));
        const P2 mid{(p.x + q.x) / 2.0, (p.y + q.y) / 2.0};
        const P2 n{-(q.y - p.y) / len, (q.x - p.x) / len};
        return std::array<Circle, 2>{Circle{{mid.x + h * n.x, mid.y + h * n.y}, r},
                                     Circle{{mid.x - h * n.x, mid.y - h * n.y}, r}};
    };
    const auto c1 = loci(a, b, theta1);
    const auto c2 = loci(b, c, theta2);

    const auto angle_at = [&](const P2& p, const P2& u, const P2& v) {
        const double ux = u.x - p.x, uy = u.y - p.y;
        const double vx = v.x - p.x, vy = v.y - p.y;
        const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
        return std::acos(std::clamp((ux * vx + uy * vy) / (nu * nv), -1.0, 1.0));
    };

    std::vector<P2> hits;
    for (const Circle& u : c1) {
        for (const Circle& v : c2) {
            const double d = dist2(u.center, v.center);
            if (d < 1e-9 * scale) {
                if (std::fabs(u.r - v.r) < 1e-9 * scale)
                    throw degenerate_geometry_error(
                        "three_point_fix: loci circles coincide (target concyclic with the "
                        "base stations)");
                continue;  // concentric, disjoint
            }
            const double arg = (d * d + u.r * u.r - v.r * v.r) / (2.0 * d);
            const double h2 = u.r * u.r - arg * arg;
            if (h2 < -1e-12 * scale * scale) continue;
            const double h = std::sqrt(std::max(h2, 0.0));
            const P2 dir{(v.center.x - u.center.x) / d, (v.center.y - u.center.y) / d};
            const P2 base{u.center.x + arg * dir.x, u.center.y + arg * dir.y};
            hits.push_back({base.x + h * dir.y, base.y - h * dir.x});
            hits.push_back({base.x - h * dir.y, base.y + h * dir.x});
        }
    }

    const double zbar = (bs[0].z + bs[1].z + bs[2].z) / 3.0;
    std::vector<Vec3> out;
    for (const P2& p : hits) {
        if (dist2(p, a) < 1e-9 || dist2(p, b) < 1e-9 || dist2(p, c) < 1e-9) continue;
        if (std::fabs(angle_at(p, a, b) - theta1) > 1e-7) continue;
        if (std::fabs(angle_at(p, b, c) - theta2) > 1e-7) continue;
        bool dup = false;
        for (const Vec3& q : out)
            if (std::hypot(q.x - p.x, q.y - p.y) < 1e-9) dup = true;
        if (!dup) out.push_back({p.x, p.y, zbar});
    }
    std::sort(out.begin(), out.end(), [](const Vec3& l, const Vec3& r) {
        if (l.x != r.x) return l.x < r.x;
        if (l.y != r.y) return l.y < r.y;
        return l.z < r.z;
    });
    return out;
}

}  // namespace rayloc
