// Release gate: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line. The process exits nonzero if any
// check fails, so CI can gate on the binary alone. Checks that need the
// bundled data read RAYLOC_DATA_DIR (default "data"); the determinism
// check also spawns the CLI named by RAYLOC_CLI_PATH.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rayloc/errors.hpp"
#include "rayloc/indoor_map.hpp"
#include "rayloc/localization.hpp"
#include "rayloc/map_io.hpp"
#include "rayloc/raytracer.hpp"
#include "rayloc/simharness.hpp"

using namespace rayloc;
namespace fs = std::filesystem;

namespace {

std::string data_dir() {
    const char* d = std::getenv("RAYLOC_DATA_DIR");
    return d ? d : "data";
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double percentile_of(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 1) return values[0];
    const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

bool clear_of_surfaces(const IndoorMap& map, const Vec3& p, double standoff) {
    for (const Surface& s : map.surfaces()) {
        const double d = s.signed_distance(p);
        if (std::abs(d) >= standoff) continue;
        if (s.contains_point(p - d * s.normal())) return false;
    }
    return true;
}

// Zero-noise round trip: forward-trace a BS-user pair, feed the exact
// components back as observations, and require the estimate to land on
// the user. The serving BS (strongest peak over the deployment set) is
// used, matching how a real link would be picked. Pairs where fewer
// than two components survive carry too little information to localize
// and are the only tolerated misses.
Outcome check_round_trip(const IndoorMap& map) {
    constexpr int kPairs = 500;
    constexpr int kMaxInteractions = 4;
    constexpr double kClusterThreshold = 1e-4;
    constexpr double kStandoff = 0.3;
    constexpr double kTolM = 1e-6;
    constexpr double kBudgetS = 300.0;

    TraceConfig tc;
    tc.tessellation_factor = 16;
    tc.min_power_dbm = -125.0;
    tc.capture_alpha = 2.0;

    const std::vector<Vec3> deployment = {
        {6.0, 12.0, 2.5}, {22.0, 12.0, 2.5}, {38.0, 12.0, 2.5}, {45.0, 12.5, 2.6}};

    std::mt19937_64 rng(20260819ULL);
    std::uniform_real_distribution<double> ux(0.5, 49.5), uy(0.5, 24.5);

    const auto t0 = std::chrono::steady_clock::now();
    int recovered = 0, no_multipath = 0, failed = 0;
    double worst_err = 0.0;
    for (int i = 0; i < kPairs; ++i) {
        const Vec3 user{ux(rng), uy(rng), 1.5};
        if (!clear_of_surfaces(map, user, kStandoff)) {
            --i;
            continue;
        }
        Vec3 bs;
        std::vector<MultipathComponent> comps;
        double best_peak = -1e9;
        for (const Vec3& cand : deployment) {
            auto c = trace(map, cand, user, tc);
            std::erase_if(c, [](const MultipathComponent& mc) {
                return mc.reflection_count() + mc.transmission_count() > kMaxInteractions;
            });
            if (c.size() < 2) continue;
            double peak = -1e9;
            for (const auto& mc : c) peak = std::max(peak, mc.received_power_dbm);
            if (peak > best_peak) {
                best_peak = peak;
                bs = cand;
                comps = std::move(c);
            }
        }
        if (comps.size() < 2) {
            ++no_multipath;
            continue;
        }
        std::vector<PathObservation> obs;
        obs.reserve(comps.size());
        for (const auto& c : comps) obs.push_back({"bs", bs, c.aod, c.tof_s});
        const LocateResult res = locate(map, obs, kMaxInteractions, kClusterThreshold);
        const double err = res.position.distance_to(user);
        if (err < kTolM) {
            ++recovered;
        } else {
            ++failed;
            worst_err = std::max(worst_err, err);
        }
    }
    const double secs = elapsed_s(t0);

    const bool rate_ok = recovered >= static_cast<int>(std::ceil(0.998 * kPairs));
    const bool misses_ok = failed == 0;  // every miss must be a <2-component pair
    const bool time_ok = secs < kBudgetS;
    Outcome o;
    o.pass = rate_ok && misses_ok && time_ok;
    o.detail = fmt("%d/%d pairs within 1e-6 m, %d skipped with <2 components, %d failed%s, %.1f s",
                   recovered, kPairs, no_multipath, failed,
                   failed ? fmt(" (worst %.3g m)", worst_err).c_str() : "", secs);
    return o;
}

// Single-BS error bands and distance growth at the paper-grade noise
// level (0.5 deg AoD, 0.25 ns ToF).
Outcome check_error_bands(const ErrorStats& stats) {
    const SeriesStats& s1 = stats.for_count(1);
    const auto los_near = s1.mean_error_where(true, 0.0, 10.0);
    const auto los_far = s1.mean_error_where(true, 10.0, 25.0);
    const auto nlos_near = s1.mean_error_where(false, 0.0, 10.0);
    const auto nlos_far = s1.mean_error_where(false, 10.0, 25.0);
    Outcome o;
    if (!los_near || !los_far || !nlos_near || !nlos_far) {
        o.detail = fmt("empty bin: users los<10m=%d los10-25m=%d nlos<10m=%d nlos10-25m=%d",
                       s1.count_where(true, 0.0, 10.0), s1.count_where(true, 10.0, 25.0),
                       s1.count_where(false, 0.0, 10.0), s1.count_where(false, 10.0, 25.0));
        return o;
    }
    const bool los_band = *los_near >= 0.05 && *los_near <= 0.40;
    const bool nlos_band = *nlos_near >= 0.08 && *nlos_near <= 0.60;
    const bool grows = *los_far > *los_near && *nlos_far > *nlos_near;
    o.pass = los_band && nlos_band && grows;
    o.detail = fmt("mean error: LOS %.1f->%.1f cm, NLOS %.1f->%.1f cm over <10 m -> 10-25 m"
                   " (bands [5,40] / [8,60] cm)",
                   *los_near * 100, *los_far * 100, *nlos_near * 100, *nlos_far * 100);
    return o;
}

// More ToF noise must hurt, and the error distribution stays
// right-skewed (median below mean).
Outcome check_noise_monotonic(const ErrorStats& base, const ErrorStats& noisy) {
    const double mean_base = base.for_count(1).mean_error();
    const double mean_noisy = noisy.for_count(1).mean_error();
    const double median_noisy = noisy.for_count(1).median_error();
    Outcome o;
    o.pass = mean_noisy > mean_base && median_noisy < mean_noisy;
    o.detail = fmt("mean %.1f cm at 0.25 ns -> %.1f cm at 1 ns; median %.1f cm stays below",
                   mean_base * 100, mean_noisy * 100, median_noisy * 100);
    return o;
}

// Adding base stations must monotonically shrink NLOS error, and the
// 3-BS worst case must sit well under the single-BS error tail.
Outcome check_multi_bs(const ErrorStats& stats) {
    std::array<double, 3> nlos_mean{};
    std::array<int, 3> nlos_n{};
    for (int k = 1; k <= 3; ++k) {
        std::vector<double> errs;
        for (const UserOutcome& u : stats.for_count(k).users)
            if (!u.los) errs.push_back(u.rms_error_m);
        nlos_n[k - 1] = static_cast<int>(errs.size());
        if (errs.empty()) {
            Outcome o;
            o.detail = fmt("no NLOS users in the %d-BS series", k);
            return o;
        }
        double sum = 0.0;
        for (double e : errs) sum += e;
        nlos_mean[k - 1] = sum / static_cast<double>(errs.size());
    }
    const double max3 = stats.for_count(3).max_error();
    const double p90_1 = stats.for_count(1).percentile(90.0);
    const bool decreasing = nlos_mean[0] > nlos_mean[1] && nlos_mean[1] > nlos_mean[2];
    const bool tail_ok = max3 < 2.0 * p90_1;
    Outcome o;
    o.pass = decreasing && tail_ok;
    o.detail = fmt("NLOS mean %.1f (n=%d) -> %.1f (n=%d) -> %.1f cm (n=%d); "
                   "3-BS max %.1f cm vs 2x 1-BS p90 %.1f cm",
                   nlos_mean[0] * 100, nlos_n[0], nlos_mean[1] * 100, nlos_n[1],
                   nlos_mean[2] * 100, nlos_n[2], max3 * 100, 2.0 * p90_1 * 100);
    return o;
}

// Back-propagation forks at most once per interaction, so a budget of
// k interactions can never yield more than 2^k candidates.
Outcome check_candidate_bound(const IndoorMap& map) {
    constexpr int kK = 3;
    constexpr int kCap = 8;  // 2^3

    std::vector<PathObservation> pool;
    const Vec3 bs{22.0, 12.0, 2.5};

    // Observations from a real trace first, then a broad random sweep.
    TraceConfig tc;
    tc.tessellation_factor = 10;
    for (const Vec3& user : {Vec3{10.0, 5.0, 1.5}, Vec3{30.0, 20.0, 1.5}})
        for (const MultipathComponent& c : trace(map, bs, user, tc))
            pool.push_back({"bs", bs, c.aod, c.tof_s});

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uaz(-kPi, kPi), uel(-0.3, 0.3), utof(10e-9, 120e-9);
    for (int i = 0; i < 500; ++i)
        pool.push_back({"bs", bs, {uaz(rng), uel(rng)}, utof(rng)});

    int worst = 0;
    long long total = 0;
    for (const PathObservation& obs : pool) {
        const auto cands = generate_candidates(map, obs, kK);
        worst = std::max(worst, static_cast<int>(cands.size()));
        total += static_cast<long long>(cands.size());
    }
    const long long m = static_cast<long long>(pool.size());
    Outcome o;
    o.pass = worst <= kCap && total <= kCap * m;
    o.detail = fmt("max %d candidates per observation (cap %d), %lld total over %lld"
                   " observations (cap %lld)",
                   worst, kCap, total, m, kCap * m);
    return o;
}

struct Fixture {
    const IndoorMap* map;
    Vec3 tx, rx;
    TraceConfig cfg;
};

std::vector<MultipathComponent> fixture_trace(const Fixture& f) {
    return trace(*f.map, f.tx, f.rx, f.cfg);
}

// Unit sanity on the propagation formulas, plus the tof/length identity
// on every traced fixture component.
Outcome check_physics_units(const std::vector<Fixture>& fixtures) {
    const bool gamma_ok = reflection_coefficient(0.0) == 0.096;
    const double fspl1m = fspl_db(1.0, 73e9);
    const bool fspl_ok = std::abs(fspl1m - 69.71) <= 0.01;

    int n = 0;
    double worst_rel = 0.0;
    for (const Fixture& f : fixtures)
        for (const MultipathComponent& c : fixture_trace(f)) {
            ++n;
            const double rel =
                std::abs(c.tof_s * kSpeedOfLight - c.path_length_m) / c.path_length_m;
            worst_rel = std::max(worst_rel, rel);
        }
    Outcome o;
    o.pass = gamma_ok && fspl_ok && n > 0 && worst_rel <= 1e-12;
    o.detail = fmt("|Gamma|(0)=%.3f, FSPL(1 m, 73 GHz)=%.4f dB, tof*c vs length worst"
                   " %.2e relative over %d components",
                   reflection_coefficient(0.0), fspl1m, worst_rel, n);
    return o;
}

// Specular consistency on every traced fixture component: equal angles
// at each bounce, straight-through transmissions, and the mirrored-image
// straight-line length equal to the walked path length.
Outcome check_specular_invariants(const std::vector<Fixture>& fixtures) {
    int n = 0, bad = 0;
    double worst_angle = 0.0, worst_len = 0.0;
    for (const Fixture& f : fixtures)
        for (const MultipathComponent& c : fixture_trace(f)) {
            ++n;
            bool ok = c.vertices.size() == c.interactions.size() + 2;
            Vec3 image = f.tx;
            for (std::size_t i = 0; ok && i < c.interactions.size(); ++i) {
                const int si = f.map->find_surface(c.interactions[i].surface_id);
                if (si < 0) {
                    ok = false;
                    break;
                }
                const Surface& s = f.map->surface(si);
                const Vec3 din = (c.vertices[i + 1] - c.vertices[i]).normalized();
                const Vec3 dout = (c.vertices[i + 2] - c.vertices[i + 1]).normalized();
                if (c.interactions[i].kind == InteractionKind::reflection) {
                    const double ain = std::acos(std::min(1.0, std::abs(din.dot(s.normal()))));
                    const double aout = std::acos(std::min(1.0, std::abs(dout.dot(s.normal()))));
                    worst_angle = std::max(worst_angle, std::abs(ain - aout));
                    ok = std::abs(ain - aout) <= 1e-9;
                    image = s.mirror_point(image);
                } else {
                    ok = din.dot(dout) >= 1.0 - 1e-12;  // transmission: no bend
                }
            }
            if (ok) {
                const double unfolded = image.distance_to(f.rx);
                worst_len = std::max(worst_len, std::abs(unfolded - c.path_length_m));
                ok = std::abs(unfolded - c.path_length_m) <= 1e-9;
            }
            if (!ok) ++bad;
        }
    Outcome o;
    o.pass = n > 0 && bad == 0;
    o.detail = fmt("%d/%d components specular-consistent; worst angle gap %.2e rad,"
                   " worst unfolded-length gap %.2e m",
                   n - bad, n, worst_angle, worst_len);
    return o;
}

// Planar three-point inversion: random well-conditioned geometries must
// come back exactly; a user on the circle through all three base
// stations must be reported, not answered.
Outcome check_three_point(const std::vector<Fixture>&) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 20.0);

    auto subtended = [](const Vec3& user, const Vec3& a, const Vec3& b) {
        const Vec3 da = (a - user).normalized();
        const Vec3 db = (b - user).normalized();
        return std::acos(std::clamp(da.dot(db), -1.0, 1.0));
    };

    int done = 0, inverted = 0;
    double worst = 0.0;
    while (done < 1000) {
        const std::array<Vec3, 3> bs = {Vec3{u(rng), u(rng), 0.0}, Vec3{u(rng), u(rng), 0.0},
                                        Vec3{u(rng), u(rng), 0.0}};
        const Vec3 user{u(rng), u(rng), 0.0};

        // Reject ill-conditioned draws: near-coincident points, a nearly
        // collinear BS triple, near-degenerate subtended angles, or a
        // user close to the BS circumscribing circle.
        bool ok = true;
        for (int i = 0; i < 3 && ok; ++i) {
            if (user.distance_to(bs[i]) < 1.0) ok = false;
            for (int j = i + 1; j < 3; ++j)
                if (bs[i].distance_to(bs[j]) < 1.0) ok = false;
        }
        if (!ok) continue;
        const double t1 = subtended(user, bs[0], bs[1]);
        const double t2 = subtended(user, bs[1], bs[2]);
        if (t1 < 0.1 || t1 > kPi - 0.1 || t2 < 0.1 || t2 > kPi - 0.1) continue;
        {
            // Circumcircle of the BS triple in the plane.
            const double ax = bs[0].x, ay = bs[0].y, bx = bs[1].x, by = bs[1].y;
            const double cx = bs[2].x, cy = bs[2].y;
            const double d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
            if (std::abs(d) < 1.0) continue;  // nearly collinear
            const double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
            const Vec3 center{(a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d,
                              (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d, 0.0};
            const double r = center.distance_to(bs[0]);
            if (std::abs(center.distance_to(user) - r) < 0.5) continue;
        }

        ++done;
        const auto solutions = three_point_fix(bs, t1, t2);
        double best = 1e30;
        for (const Vec3& s : solutions) best = std::min(best, s.distance_to(user));
        worst = std::max(worst, best);
        if (best <= 1e-9) ++inverted;
    }

    // Concyclic case: the two loci circles coincide and no single point
    // can be singled out.
    bool degenerate_flagged = false;
    try {
        (void)three_point_fix({Vec3{0, 5, 0}, Vec3{5, 10, 0}, Vec3{10, 5, 0}},
                              subtended({5, 0, 0}, {0, 5, 0}, {5, 10, 0}),
                              subtended({5, 0, 0}, {5, 10, 0}, {10, 5, 0}));
    } catch (const degenerate_geometry_error&) {
        degenerate_flagged = true;
    }

    Outcome o;
    o.pass = inverted == done && degenerate_flagged;
    o.detail = fmt("%d/%d random geometries inverted within 1e-9 m (worst %.2e m);"
                   " concyclic case %s",
                   inverted, done, worst,
                   degenerate_flagged ? "raised degenerate_geometry_error" : "NOT flagged");
    return o;
}

// Two CLI runs with one seed must produce byte-identical result files.
Outcome check_determinism() {
    Outcome o;
    const char* cli = std::getenv("RAYLOC_CLI_PATH");
    if (!cli) {
        o.detail = "RAYLOC_CLI_PATH is not set";
        return o;
    }
    const std::string scenario = data_dir() + "/smoke.scenario.json";
    const fs::path base = fs::temp_directory_path() / "rayloc_acceptance_det";
    const fs::path out1 = base / "run1", out2 = base / "run2";
    fs::remove_all(base);

    for (const fs::path& out : {out1, out2}) {
        const std::string cmd = std::string(cli) + " simulate --scenario " + scenario +
                                " --out " + out.string() + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
            o.detail = "simulate exited nonzero";
            return o;
        }
    }

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(out1))
        names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    int compared = 0;
    bool identical = !names.empty();
    for (const std::string& name : names) {
        const std::string a = slurp(out1 / name);
        const std::string b = slurp(out2 / name);
        if (a.empty() || a != b) identical = false;
        ++compared;
    }
    fs::remove_all(base);
    o.pass = identical;
    o.detail = fmt("%d output files byte-identical across two same-seed runs", compared);
    return o;
}

}  // namespace

int main() {
    const std::string dir = data_dir();
    int failures = 0;
    int index = 0;

    auto report = [&](const std::string& name, const std::function<Outcome()>& run) {
        ++index;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("CRITERION %d (%s): %s - %s\n", index, name.c_str(),
                    o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        return o.pass;
    };

    const IndoorMap office = load_map_file(dir + "/office_synthetic.map.json");
    const IndoorMap demo = load_map_file(dir + "/demo_room.map.json");

    // Shared Monte Carlo runs: the bundled 3-BS scenario at its stock
    // noise level, and the same scenario with sigma_tof raised to 1 ns.
    std::optional<ErrorStats> base_stats, noisy_stats;
    auto base = [&]() -> const ErrorStats& {
        if (!base_stats) base_stats = run_scenario(load_scenario(dir + "/office_3bs.scenario.json"));
        return *base_stats;
    };
    auto noisy = [&]() -> const ErrorStats& {
        if (!noisy_stats)
            noisy_stats = run_scenario(load_scenario(dir + "/office_3bs_tof1ns.scenario.json"));
        return *noisy_stats;
    };

    // Trace fixtures shared by the physics and specular checks.
    std::vector<Fixture> fixtures;
    {
        Fixture f1{&demo, {1.5, 1.5, 2.5}, {8.0, 4.0, 1.2}, {}};
        f1.cfg.tessellation_factor = 12;
        Fixture f2{&office, {22.0, 12.0, 2.5}, {10.0, 5.0, 1.5}, {}};
        f2.cfg.tessellation_factor = 10;
        Fixture f3{&office, {6.0, 12.0, 2.5}, {44.0, 20.0, 1.5}, {}};
        f3.cfg.tessellation_factor = 10;
        fixtures = {f1, f2, f3};
    }

    report("zero-noise round trip", [&] { return check_round_trip(office); });
    report("single-BS error bands", [&] { return check_error_bands(base()); });
    report("ToF noise monotonicity", [&] { return check_noise_monotonic(base(), noisy()); });
    report("multi-BS improvement", [&] { return check_multi_bs(base()); });
    report("candidate count bound", [&] { return check_candidate_bound(office); });
    report("physics unit checks", [&] { return check_physics_units(fixtures); });
    report("specular invariants", [&] { return check_specular_invariants(fixtures); });
    report("three-point inversion", [&] { return check_three_point(fixtures); });
    report("simulate determinism", [&] { return check_determinism(); });

    if (failures) std::printf("%d of %d criteria failed\n", failures, index);
    return failures ? 1 : 0;
}
