#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "rayloc/errors.hpp"
#include "rayloc/localization.hpp"
#include "rayloc/map_io.hpp"
#include "rayloc/raytracer.hpp"

using namespace rayloc;

namespace {

std::string data_dir() {
    const char* d = std::getenv("RAYLOC_DATA_DIR");
    return d ? d : "data";
}

CandidateLocation candidate(Vec3 pos, std::string bs, int obs_index) {
    CandidateLocation c;
    c.position = pos;
    c.bs_id = std::move(bs);
    c.observation_index = obs_index;
    return c;
}

PathObservation observe(const Vec3& bs, const MultipathComponent& c) {
    return {"bs0", bs, c.aod, c.tof_s};
}

// One transmissive divider between BS and user, flanked by two long side
// walls: every path from the left reaches the user on the right, and the
// back-propagated branches funnel into the true position.
IndoorMap funnel_map(const Vec3& shift = {0, 0, 0}) {
    const auto sv = [&](std::initializer_list<Vec3> vs) {
        std::vector<Vec3> out;
        for (const Vec3& v : vs) out.push_back(v + shift);
        return out;
    };
    std::vector<Surface> walls;
    walls.emplace_back("mid", sv({{3, -1.5, 0}, {3, 1.5, 0}, {3, 1.5, 2}, {3, -1.5, 2}}));
    walls.emplace_back("top", sv({{0, 2, 0}, {6, 2, 0}, {6, 2, 3}, {0, 2, 3}}));
    walls.emplace_back("bot", sv({{0, -2, 0}, {6, -2, 0}, {6, -2, 3}, {0, -2, 3}}));
    return IndoorMap("funnel", std::move(walls));
}

}  // namespace

TEST_CASE("free space back-propagation is a straight march") {
    const IndoorMap map("free", {}, Aabb{{-10, -10, -10}, {10, 10, 10}});
    PathObservation obs{"bs0", {0, 0, 0}, {0.0, 0.0}, 5.0 / kSpeedOfLight};

    const auto cands = generate_candidates(map, obs);
    REQUIRE(cands.size() == 1);
    CHECK((cands[0].position - Vec3{5, 0, 0}).norm() < 1e-9);
    CHECK(cands[0].branch_signature.empty());
    CHECK(std::abs(cands[0].residual_length_m) < 1e-9);
}

TEST_CASE("a wall in the budget forks reflect and transmit") {
    std::vector<Surface> walls;
    walls.emplace_back("w", std::vector<Vec3>{{2, -2, -2}, {2, 2, -2}, {2, 2, 2}, {2, -2, 2}});
    const IndoorMap map("one_wall", walls, Aabb{{-10, -10, -10}, {10, 10, 10}});
    PathObservation obs{"bs0", {0, 0, 0}, {0.0, 0.0}, 5.0 / kSpeedOfLight};

    const auto cands = generate_candidates(map, obs);
    REQUIRE(cands.size() == 2);

    bool saw_transmit = false, saw_reflect = false;
    for (const auto& c : cands) {
        if (signature_to_string(c.branch_signature) == "T:w") {
            saw_transmit = true;
            CHECK((c.position - Vec3{5, 0, 0}).norm() < 1e-9);
        }
        if (signature_to_string(c.branch_signature) == "R:w") {
            saw_reflect = true;
            // 2 m out, reflected, 3 m back.
            CHECK((c.position - Vec3{-1, 0, 0}).norm() < 1e-9);
        }
    }
    CHECK(saw_transmit);
    CHECK(saw_reflect);
}

TEST_CASE("non-positive budget is rejected") {
    const IndoorMap map("free", {}, Aabb{{-10, -10, -10}, {10, 10, 10}});
    PathObservation obs{"bs0", {0, 0, 0}, {0.0, 0.0}, 0.0};
    CHECK_THROWS_AS(generate_candidates(map, obs), validation_error);
    obs.tof_s = -1e-9;
    CHECK_THROWS_AS(generate_candidates(map, obs), validation_error);
}

TEST_CASE("branching never exceeds 2^k candidates") {
    const IndoorMap map = load_map_file(data_dir() + "/office_synthetic.map.json");
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> az(-kPi, kPi);
    std::uniform_real_distribution<double> el(-0.3, 0.3);
    std::uniform_real_distribution<double> tof_ns(10.0, 120.0);

    for (int i = 0; i < 200; ++i) {
        PathObservation obs{"bs0", {22.0, 12.0, 2.5}, {az(rng), el(rng)}, tof_ns(rng) * 1e-9};
        for (int k : {2, 3}) {
            const auto cands = generate_candidates(map, obs, k);
            CHECK(static_cast<int>(cands.size()) <= (1 << k));
            for (const auto& c : cands)
                CHECK(static_cast<int>(c.branch_signature.size()) <= k);
        }
    }
}

TEST_CASE("clustering groups coincident points") {
    std::vector<CandidateLocation> cands{candidate({1, 2, 3}, "a", 0),
                                         candidate({1, 2, 3}, "a", 1),
                                         candidate({1, 2, 3}, "b", 0)};
    const auto clusters = cluster_candidates(cands, 0.4);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].member_count == 3);
    CHECK(clusters[0].distinct_observations == 3);
    CHECK((clusters[0].centroid - Vec3{1, 2, 3}).norm() < 1e-12);
    CHECK(clusters[0].rms_radius_m == doctest::Approx(0.0));
}

TEST_CASE("single linkage chains within the threshold") {
    std::vector<CandidateLocation> cands{candidate({0, 0, 0}, "a", 0),
                                         candidate({0.3, 0, 0}, "a", 1),
                                         candidate({0.6, 0, 0}, "a", 2)};
    const auto clusters = cluster_candidates(cands, 0.4);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].member_count == 3);
    CHECK(clusters[0].centroid.x == doctest::Approx(0.3));
    CHECK(clusters[0].rms_radius_m == doctest::Approx(0.2449489742783178));

    // The 0.0 and 1.0 pair does not chain at the same threshold.
    std::vector<CandidateLocation> split{candidate({0, 0, 0}, "a", 0),
                                         candidate({1.0, 0, 0}, "a", 1)};
    CHECK(cluster_candidates(split, 0.4).size() == 2);
}

TEST_CASE("clusters with more distinct observations outrank larger ones") {
    std::vector<CandidateLocation> cands{
        candidate({0, 0, 0}, "a", 0), candidate({0.01, 0, 0}, "a", 0),
        candidate({0.02, 0, 0}, "a", 0),  // three members, one source
        candidate({5, 0, 0}, "a", 0), candidate({5.01, 0, 0}, "a", 1)};  // two sources
    const auto clusters = cluster_candidates(cands, 0.4);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].distinct_observations == 2);
    CHECK(clusters[0].member_count == 2);
    CHECK(clusters[0].centroid.x == doctest::Approx(5.005));
    CHECK(clusters[1].member_count == 3);
}

TEST_CASE("empty candidate list clusters to nothing") {
    CHECK(cluster_candidates({}, 0.4).empty());
}

TEST_CASE("three-point fix recovers a planar position") {
    const std::array<Vec3, 3> bs{Vec3{0, 0, 0}, Vec3{10, 0, 0}, Vec3{0, 10, 0}};
    // Angles subtended at (3, 2) by the BS pairs.
    const double theta1 = 2.2752903910371143;
    const double theta2 = 2.20786665607058;

    const auto sols = three_point_fix(bs, theta1, theta2);
    REQUIRE(!sols.empty());
    bool found = false;
    for (const Vec3& s : sols)
        if ((s - Vec3{3, 2, 0}).norm() < 1e-9) found = true;
    CHECK(found);
}

TEST_CASE("concyclic three-point configuration is flagged") {
    // All three BSs and the user on the circle centered (5,5) radius 5:
    // both loci circles coincide with it.
    const std::array<Vec3, 3> bs{Vec3{0, 5, 0}, Vec3{5, 10, 0}, Vec3{10, 5, 0}};
    const Vec3 user{5, 0, 0};
    const auto angle = [&](const Vec3& a, const Vec3& b) {
        const Vec3 va = a - user, vb = b - user;
        return std::acos(va.dot(vb) / (va.norm() * vb.norm()));
    };
    CHECK_THROWS_AS(three_point_fix(bs, angle(bs[0], bs[1]), angle(bs[1], bs[2])),
                    degenerate_geometry_error);
}

TEST_CASE("locate flags a single observation as ambiguous") {
    const IndoorMap map("free", {}, Aabb{{-10, -10, -10}, {10, 10, 10}});
    std::vector<PathObservation> obs{{"bs0", {0, 0, 0}, {0.0, 0.0}, 5.0 / kSpeedOfLight}};

    const auto res = locate(map, obs);
    CHECK(res.ambiguous);
    CHECK((res.position - Vec3{5, 0, 0}).norm() < 1e-9);
    CHECK(res.candidate_count == 1);
}

TEST_CASE("locate requires observations") {
    const IndoorMap map("free", {}, Aabb{{-10, -10, -10}, {10, 10, 10}});
    CHECK_THROWS_AS(locate(map, {}), validation_error);
}

TEST_CASE("funnel fixture localizes exactly at every budget") {
    const IndoorMap map = funnel_map();
    const Vec3 tx{0, 0, 1}, user{6, 0, 1};
    TraceConfig cfg;
    cfg.tessellation_factor = 24;

    const auto comps = trace(map, tx, user, cfg);
    REQUIRE(comps.size() == 7);

    std::vector<PathObservation> obs;
    for (const auto& c : comps) obs.push_back(observe(tx, c));

    // Budget 1 serves the three single-interaction observations; the
    // branches ending outside the wall hull are discarded, leaving the
    // true position plus one ghost that folds back onto the BS.
    const auto res1 = locate(map, obs, 1, 0.4);
    CHECK((res1.position - user).norm() < 1e-9);
    CHECK(res1.candidate_count == 4);
    CHECK_FALSE(res1.ambiguous);
    REQUIRE(!res1.clusters.empty());
    CHECK(res1.clusters[0].member_count == 3);
    CHECK(res1.clusters[0].distinct_observations == 3);

    // Budget 3 adds the double-bounce observations; all seven
    // observations then agree on the true position.
    const auto res3 = locate(map, obs, 3, 0.4);
    CHECK((res3.position - user).norm() < 1e-9);
    CHECK(res3.clusters[0].member_count == 7);
    CHECK(res3.clusters[0].distinct_observations == 7);
}

TEST_CASE("locate is translation invariant") {
    const Vec3 shift{7.0, 3.0, 0.5};
    const IndoorMap base = funnel_map();
    const IndoorMap moved = funnel_map(shift);
    const Vec3 tx{0, 0, 1}, user{6, 0, 1};
    TraceConfig cfg;
    cfg.tessellation_factor = 24;

    const auto comps = trace(base, tx, user, cfg);
    std::vector<PathObservation> obs, obs_moved;
    for (const auto& c : comps) {
        obs.push_back(observe(tx, c));
        obs_moved.push_back({"bs0", tx + shift, c.aod, c.tof_s});
    }

    const auto res = locate(base, obs, 3, 0.4);
    const auto res_moved = locate(moved, obs_moved, 3, 0.4);
    CHECK((res_moved.position - (res.position + shift)).norm() < 1e-9);
    CHECK(res_moved.candidate_count == res.candidate_count);
}

TEST_CASE("demo room round trip is exact at zero noise") {
    const IndoorMap map = load_map_file(data_dir() + "/demo_room.map.json");
    TraceConfig cfg;
    cfg.tessellation_factor = 12;
    const Vec3 tx{1.5, 1.5, 2.5}, user{8.0, 4.0, 1.2};

    const auto comps = trace(map, tx, user, cfg);
    std::vector<PathObservation> obs;
    for (const auto& c : comps) {
        if (c.reflection_count() + c.transmission_count() > 3) continue;
        obs.push_back(observe(tx, c));
    }
    REQUIRE(obs.size() >= 2);

    const auto res = locate(map, obs, 3, 0.4);
    CHECK((res.position - user).norm() < 1e-6);
    CHECK_FALSE(res.ambiguous);
    // Every observation's true branch lands on the user; the box walls
    // mirror all ghost branches outside the room, so one cluster remains.
    REQUIRE(res.clusters.size() == 1);
    CHECK(res.clusters[0].distinct_observations == static_cast<int>(obs.size()));
}

TEST_CASE("observation validation") {
    PathObservation obs{"bs0", {0, 0, 0}, {0.0, 0.0}, -1.0};
    CHECK_THROWS_AS(obs.validate(), validation_error);
    obs.tof_s = 1e-8;
    CHECK_NOTHROW(obs.validate());
    obs.bs_id.clear();
    CHECK_THROWS_AS(obs.validate(), validation_error);
}
