#include "rayloc/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "detail/format.hpp"
#include "detail/parallel.hpp"
#include "detail/rng.hpp"
#include "rayloc/errors.hpp"
#include "rayloc/map_io.hpp"

namespace rayloc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint32_t kPlacementTag = 0x706c6163;  // placement substreams
constexpr std::uint32_t kTrialTag = 0x7472696c;      // per-trial noise substreams
constexpr int kMaxPlacementAttempts = 200;
constexpr double kUserStandoffM = 0.3;  // min clearance between a user and any surface

struct PlacedUser {
    Vec3 position;
    std::vector<int> covering;  // BS indices, nearest first
    std::vector<std::vector<MultipathComponent>> comps;  // parallel to covering
    std::vector<bool> los;                               // parallel to covering
    std::vector<double> dist;                            // parallel to covering
    bool undercovered = false;  // best BS yielded a single component
    bool resampled = false;
};

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

// A base station covers a user when the forward trace resolves at
// least two multipath components; one component cannot disambiguate
// the back-propagation branches.
// Users are placed inside the surfaces' own box (the building shell),
// not the map's padded workspace bounds.
Aabb placement_box(const IndoorMap& map) {
    if (map.surfaces().empty()) return map.bounding_box();
    Aabb box = map.surfaces()[0].bounding_box();
    for (const Surface& s : map.surfaces())
        for (const Vec3& v : s.vertices()) box.expand(v);
    return box;
}

// Keep the `cap` strongest components, preserving arrival order. The
// coverage decision is made on the untrimmed trace.
void keep_strongest(std::vector<MultipathComponent>& comps, int cap) {
    if (cap <= 0 || static_cast<int>(comps.size()) <= cap) return;
    std::vector<std::size_t> idx(comps.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return comps[a].received_power_dbm > comps[b].received_power_dbm;
    });
    idx.resize(static_cast<std::size_t>(cap));
    std::sort(idx.begin(), idx.end());
    std::vector<MultipathComponent> kept;
    kept.reserve(idx.size());
    for (std::size_t i : idx) kept.push_back(std::move(comps[i]));
    comps = std::move(kept);
}

PlacedUser place_user(const ScenarioConfig& cfg, const TraceConfig& trace_cfg, int user) {
    const Aabb box = placement_box(cfg.map);
    const double margin_x = std::min(0.5, (box.max.x - box.min.x) / 4.0);
    const double margin_y = std::min(0.5, (box.max.y - box.min.y) / 4.0);
    const double bs_guard =
        std::min(1.0, 0.1 * (box.max - box.min).norm());

    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
        auto rng = detail::substream(cfg.rng_seed, kPlacementTag,
                                     static_cast<std::uint64_t>(user),
                                     static_cast<std::uint64_t>(attempt));
        PlacedUser placed;
        placed.resampled = attempt > 0;
        if (cfg.user_regions.empty()) {
            placed.position = {uniform_in(rng, box.min.x + margin_x, box.max.x - margin_x),
                               uniform_in(rng, box.min.y + margin_y, box.max.y - margin_y),
                               cfg.user_height_m};
        } else {
            // Pick a rectangle with probability proportional to its area,
            // then sample uniformly inside it.
            double total = 0.0;
            for (const auto& r : cfg.user_regions) total += (r[2] - r[0]) * (r[3] - r[1]);
            double pick = uniform_in(rng, 0.0, total);
            std::size_t chosen = cfg.user_regions.size() - 1;
            for (std::size_t i = 0; i < cfg.user_regions.size(); ++i) {
                const auto& r = cfg.user_regions[i];
                pick -= (r[2] - r[0]) * (r[3] - r[1]);
                if (pick <= 0.0) {
                    chosen = i;
                    break;
                }
            }
            const auto& r = cfg.user_regions[chosen];
            placed.position = {uniform_in(rng, r[0], r[2]), uniform_in(rng, r[1], r[3]),
                               cfg.user_height_m};
        }

        bool too_close = false;
        for (const Vec3& bs : cfg.bs_positions)
            if (placed.position.distance_to(bs) < bs_guard) too_close = true;
        // A receiver flush against a wall makes the reflected and the
        // transmitted back-propagation branches land within the cluster
        // threshold of each other, which biases the estimate for reasons
        // that have nothing to do with the scenario under study.
        for (const Surface& s : cfg.map.surfaces()) {
            const double d = s.signed_distance(placed.position);
            if (std::abs(d) < kUserStandoffM &&
                s.contains_point(placed.position - s.normal() * d))
                too_close = true;
        }
        if (too_close) continue;

        std::vector<int> order(cfg.bs_positions.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
            return cfg.bs_positions[static_cast<std::size_t>(i)].distance_to(placed.position) <
                   cfg.bs_positions[static_cast<std::size_t>(j)].distance_to(placed.position);
        });

        int fallback = -1;
        std::vector<MultipathComponent> fallback_comps;
        for (int bs : order) {
            if (static_cast<int>(placed.covering.size()) >= cfg.bs_count_policy) break;
            auto comps = trace(cfg.map, cfg.bs_positions[static_cast<std::size_t>(bs)],
                               placed.position, trace_cfg);
            // Sensitivity gate on the raw trace: the strongest arrival
            // decides whether the link closes at all.
            if (cfg.coverage_min_peak_dbm) {
                double peak = -std::numeric_limits<double>::infinity();
                for (const MultipathComponent& c : comps)
                    peak = std::max(peak, c.received_power_dbm);
                if (peak < *cfg.coverage_min_peak_dbm) continue;
            }
            // Back-propagation forks at most max_interactions times, so
            // components with more interactions can never resolve to the
            // true position; they would only feed spurious clusters.
            std::erase_if(comps, [&](const MultipathComponent& c) {
                return c.reflection_count() + c.transmission_count() > cfg.max_interactions;
            });
            if (comps.size() >= 2) {
                keep_strongest(comps, cfg.max_obs_per_bs);
                placed.covering.push_back(bs);
                placed.comps.push_back(std::move(comps));
            } else if (comps.size() == 1 && fallback < 0) {
                fallback = bs;
                fallback_comps = std::move(comps);
            }
        }

        if (placed.covering.empty() && fallback >= 0 &&
            attempt == kMaxPlacementAttempts - 1) {
            // Sparse maps (e.g. free space) may never yield two
            // components; accept the single-component BS rather than
            // spin forever.
            placed.covering.push_back(fallback);
            placed.comps.push_back(std::move(fallback_comps));
            placed.undercovered = true;
        }
        if (placed.covering.empty()) continue;

        for (int bs : placed.covering) {
            placed.los.push_back(line_of_sight(
                cfg.map, cfg.bs_positions[static_cast<std::size_t>(bs)], placed.position));
            placed.dist.push_back(
                cfg.bs_positions[static_cast<std::size_t>(bs)].distance_to(placed.position));
        }
        return placed;
    }
    throw validation_error("run_scenario: cannot place a covered user after " +
                           std::to_string(kMaxPlacementAttempts) + " attempts");
}

double wrap_azimuth(double az) { return std::atan2(std::sin(az), std::cos(az)); }

struct TrialErrors {
    // errors[k-1][t] = localization error of user at trial t with k BSs;
    // NaN marks a skipped trial.
    std::vector<std::vector<double>> errors;
};

TrialErrors run_user_trials(const ScenarioConfig& cfg, const PlacedUser& user, int user_index) {
    const int n_series = static_cast<int>(user.covering.size());
    TrialErrors out;
    out.errors.assign(static_cast<std::size_t>(n_series), {});
    for (auto& v : out.errors) v.assign(static_cast<std::size_t>(cfg.n_trials), 0.0);

    for (int t = 0; t < cfg.n_trials; ++t) {
        auto rng = detail::substream(cfg.rng_seed, kTrialTag,
                                     static_cast<std::uint64_t>(user_index),
                                     static_cast<std::uint64_t>(t));
        std::normal_distribution<double> gauss(0.0, 1.0);

        // Noise is drawn for every covering BS in a fixed order, so the
        // k-BS observation set is a strict prefix of the (k+1)-BS set
        // within one trial.
        std::vector<PathObservation> obs;
        std::vector<std::size_t> obs_per_bs;
        for (int s = 0; s < n_series; ++s) {
            const int bs = user.covering[static_cast<std::size_t>(s)];
            for (const MultipathComponent& comp : user.comps[static_cast<std::size_t>(s)]) {
                const double daz = gauss(rng) * cfg.sigma_aod_rad;
                const double del = gauss(rng) * cfg.sigma_aod_rad;
                const double dtof = gauss(rng) * cfg.sigma_tof_s;
                PathObservation o;
                o.bs_id = "bs" + std::to_string(bs);
                o.bs_position = cfg.bs_positions[static_cast<std::size_t>(bs)];
                o.angle.azimuth = wrap_azimuth(comp.aod.azimuth + daz);
                o.angle.elevation =
                    std::clamp(comp.aod.elevation + del, -kPi / 2.0, kPi / 2.0);
                o.tof_s = comp.tof_s + dtof;
                if (o.tof_s > 0.0) obs.push_back(std::move(o));
            }
            obs_per_bs.push_back(obs.size());
        }

        for (int k = 1; k <= n_series; ++k) {
            const std::size_t take = obs_per_bs[static_cast<std::size_t>(k - 1)];
            std::vector<PathObservation> subset(obs.begin(),
                                                obs.begin() + static_cast<std::ptrdiff_t>(take));
            double err = std::numeric_limits<double>::quiet_NaN();
            if (!subset.empty()) {
                try {
                    const LocateResult res =
                        locate(cfg.map, subset, cfg.max_interactions, cfg.cluster_threshold_m);
                    err = res.position.distance_to(user.position);
                } catch (const validation_error&) {
                    // all branches infeasible under this noise draw
                }
            }
            out.errors[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(t)] = err;
        }
    }
    return out;
}

struct SampleStats {
    double mean = 0.0, median = 0.0, p90 = 0.0, max = 0.0;
    int count = 0;
};

double percentile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

SampleStats sample_stats(std::vector<double> values) {
    SampleStats s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    s.median = percentile_sorted(values, 50.0);
    s.p90 = percentile_sorted(values, 90.0);
    s.max = values.back();
    return s;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw io_error("failed writing '" + path.string() + "'");
}

}  // namespace

void ScenarioConfig::validate() const {
    if (bs_positions.empty()) throw validation_error("scenario: no base stations");
    if (n_users < 1) throw validation_error("scenario: n_users must be >= 1");
    if (n_trials < 1) throw validation_error("scenario: n_trials must be >= 1");
    if (sigma_aod_rad < 0.0 || sigma_tof_s < 0.0)
        throw validation_error("scenario: noise sigmas must be >= 0");
    if (bs_count_policy < 1 || bs_count_policy > static_cast<int>(bs_positions.size()))
        throw validation_error("scenario: bs_count_policy outside [1, #bs]");
    if (max_obs_per_bs < 0)
        throw validation_error("scenario: max_obs_per_bs must be >= 0");
    for (const auto& r : user_regions)
        if (!(r[2] > r[0]) || !(r[3] > r[1]))
            throw validation_error("scenario: user_regions rectangles must have positive area");
    if (max_interactions < 1)
        throw validation_error("scenario: max_interactions must be >= 1");
    if (!(cluster_threshold_m > 0.0))
        throw validation_error("scenario: cluster_threshold_m must be > 0");
    trace.validate();
}

double SeriesStats::percentile(double p) const {
    if (sorted_errors.empty()) throw validation_error("percentile: no samples");
    return percentile_sorted(sorted_errors, p);
}

double SeriesStats::mean_error() const {
    if (sorted_errors.empty()) throw validation_error("mean_error: no samples");
    return std::accumulate(sorted_errors.begin(), sorted_errors.end(), 0.0) /
           static_cast<double>(sorted_errors.size());
}

double SeriesStats::max_error() const {
    if (sorted_errors.empty()) throw validation_error("max_error: no samples");
    return sorted_errors.back();
}

std::optional<double> SeriesStats::mean_error_where(bool los, double dmin, double dmax) const {
    double sum = 0.0;
    int n = 0;
    for (const UserOutcome& u : users) {
        if (u.los != los || u.link_distance_m < dmin || u.link_distance_m >= dmax) continue;
        sum += u.rms_error_m;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

int SeriesStats::count_where(bool los, double dmin, double dmax) const {
    int n = 0;
    for (const UserOutcome& u : users)
        if (u.los == los && u.link_distance_m >= dmin && u.link_distance_m < dmax) ++n;
    return n;
}

std::optional<double> SeriesStats::mean_error_all_nlos() const {
    double sum = 0.0;
    int n = 0;
    for (const UserOutcome& u : users) {
        if (u.los_links != 0) continue;
        sum += u.rms_error_m;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

int SeriesStats::count_all_nlos() const {
    int n = 0;
    for (const UserOutcome& u : users)
        if (u.los_links == 0) ++n;
    return n;
}

const SeriesStats& ErrorStats::for_count(int bs_count) const {
    for (const SeriesStats& s : series)
        if (s.bs_count == bs_count) return s;
    throw validation_error("no series for bs_count " + std::to_string(bs_count));
}

ErrorStats run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const Aabb box = placement_box(cfg.map);
    if (cfg.user_height_m < box.min.z || cfg.user_height_m > box.max.z)
        throw validation_error("scenario: user height outside map bounds");
    for (std::size_t i = 0; i < cfg.bs_positions.size(); ++i)
        if (!cfg.map.contains(cfg.bs_positions[i]))
            throw validation_error("scenario: bs" + std::to_string(i) + " outside map bounds");

    // The outer loops parallelize over users; inner traces stay
    // single-threaded to avoid nested spawning.
    TraceConfig inner_trace = cfg.trace;
    inner_trace.threads = 1;

    std::vector<PlacedUser> placed(static_cast<std::size_t>(cfg.n_users));
    detail::parallel_for(static_cast<std::size_t>(cfg.n_users), cfg.trace.threads,
                         [&](std::size_t begin, std::size_t end) {
                             for (std::size_t u = begin; u < end; ++u)
                                 placed[u] = place_user(cfg, inner_trace, static_cast<int>(u));
                         });

    std::vector<TrialErrors> trials(static_cast<std::size_t>(cfg.n_users));
    detail::parallel_for(static_cast<std::size_t>(cfg.n_users), cfg.trace.threads,
                         [&](std::size_t begin, std::size_t end) {
                             for (std::size_t u = begin; u < end; ++u)
                                 trials[u] = run_user_trials(cfg, placed[u], static_cast<int>(u));
                         });

    ErrorStats stats;
    for (const PlacedUser& p : placed) {
        if (p.resampled) ++stats.resampled_users;
        if (p.undercovered) ++stats.undercovered_users;
    }

    for (int k = 1; k <= cfg.bs_count_policy; ++k) {
        SeriesStats series;
        series.bs_count = k;
        for (int u = 0; u < cfg.n_users; ++u) {
            const PlacedUser& p = placed[static_cast<std::size_t>(u)];
            if (static_cast<int>(p.covering.size()) < k) continue;

            std::vector<double> errs;
            errs.reserve(static_cast<std::size_t>(cfg.n_trials));
            for (double e : trials[static_cast<std::size_t>(u)]
                                .errors[static_cast<std::size_t>(k - 1)])
                if (std::isfinite(e)) errs.push_back(e);
            if (errs.empty()) continue;

            UserOutcome outcome;
            outcome.user = u;
            outcome.position = p.position;
            outcome.bs_used = k;
            outcome.bs_indices.assign(p.covering.begin(), p.covering.begin() + k);
            outcome.los = p.los[0];
            outcome.link_distance_m = p.dist[0];
            for (int s = 0; s < k; ++s)
                if (p.los[static_cast<std::size_t>(s)]) ++outcome.los_links;
            outcome.trials_used = static_cast<int>(errs.size());

            double sq = 0.0, sum = 0.0;
            for (double e : errs) {
                sq += e * e;
                sum += e;
            }
            outcome.rms_error_m = std::sqrt(sq / static_cast<double>(errs.size()));
            outcome.mean_error_m = sum / static_cast<double>(errs.size());
            std::sort(errs.begin(), errs.end());
            outcome.median_error_m = percentile_sorted(errs, 50.0);
            outcome.max_error_m = errs.back();

            series.users.push_back(std::move(outcome));
        }
        series.sorted_errors.reserve(series.users.size());
        for (const UserOutcome& u : series.users) series.sorted_errors.push_back(u.rms_error_m);
        std::sort(series.sorted_errors.begin(), series.sorted_errors.end());
        stats.series.push_back(std::move(series));
    }
    return stats;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open scenario file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("scenario: ") + e.what());
    }
    if (!doc.is_object()) throw parse_error("scenario: document must be a JSON object");

    const auto check_keys = [](const json& obj, std::initializer_list<const char*> allowed,
                               const std::string& where) {
        for (const auto& item : obj.items()) {
            bool known = false;
            for (const char* key : allowed)
                if (item.key() == key) known = true;
            if (!known) throw parse_error(where + ": unknown key '" + item.key() + "'");
        }
    };
    check_keys(doc,
               {"name", "map", "bs_positions", "n_users", "n_trials", "sigma_aod_deg",
                "sigma_tof_ns", "rng_seed", "bs_count_policy", "max_obs_per_bs",
                "coverage_min_peak_dbm", "user_regions", "user_height_m", "max_interactions",
                "cluster_threshold_m", "trace"},
               "scenario");

    const auto num = [&](const char* key, double fallback) {
        const auto it = doc.find(key);
        if (it == doc.end()) return fallback;
        if (!it->is_number()) throw parse_error(std::string("scenario: '") + key + "' must be a number");
        return it->get<double>();
    };
    const auto integer = [&](const char* key, int fallback) {
        const auto it = doc.find(key);
        if (it == doc.end()) return fallback;
        if (!it->is_number_integer())
            throw parse_error(std::string("scenario: '") + key + "' must be an integer");
        return it->get<int>();
    };

    const auto map_it = doc.find("map");
    if (map_it == doc.end() || !map_it->is_string())
        throw parse_error("scenario: missing string 'map'");
    fs::path map_path(map_it->get<std::string>());
    if (map_path.is_relative()) map_path = fs::path(path).parent_path() / map_path;

    ScenarioConfig cfg(load_map_file(map_path.string()));
    cfg.name = fs::path(path).stem().string();
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) throw parse_error("scenario: 'name' must be a string");
        cfg.name = it->get<std::string>();
    }

    const auto bs_it = doc.find("bs_positions");
    if (bs_it == doc.end() || !bs_it->is_array() || bs_it->empty())
        throw parse_error("scenario: missing non-empty 'bs_positions' array");
    for (const auto& v : *bs_it) {
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
            !v[2].is_number())
            throw parse_error("scenario: each bs position must be an array of 3 numbers");
        cfg.bs_positions.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
    }

    cfg.n_users = integer("n_users", cfg.n_users);
    cfg.n_trials = integer("n_trials", cfg.n_trials);
    cfg.sigma_aod_rad = deg_to_rad(num("sigma_aod_deg", 0.5));
    cfg.sigma_tof_s = num("sigma_tof_ns", 0.25) * 1e-9;
    cfg.rng_seed = static_cast<std::uint64_t>(integer("rng_seed", 1));
    cfg.bs_count_policy =
        integer("bs_count_policy", std::min<int>(3, static_cast<int>(cfg.bs_positions.size())));
    cfg.max_obs_per_bs = integer("max_obs_per_bs", cfg.max_obs_per_bs);
    if (doc.contains("coverage_min_peak_dbm"))
        cfg.coverage_min_peak_dbm = num("coverage_min_peak_dbm", 0.0);
    if (auto it = doc.find("user_regions"); it != doc.end()) {
        if (!it->is_array()) throw parse_error("scenario: 'user_regions' must be an array");
        for (const auto& v : *it) {
            if (!v.is_array() || v.size() != 4 || !v[0].is_number() || !v[1].is_number() ||
                !v[2].is_number() || !v[3].is_number())
                throw parse_error(
                    "scenario: each user region must be an array of 4 numbers [x0, y0, x1, y1]");
            cfg.user_regions.push_back(
                {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()});
        }
    }
    cfg.user_height_m = num("user_height_m", cfg.user_height_m);
    cfg.max_interactions = integer("max_interactions", cfg.max_interactions);
    cfg.cluster_threshold_m = num("cluster_threshold_m", cfg.cluster_threshold_m);

    if (auto it = doc.find("trace"); it != doc.end()) {
        if (!it->is_object()) throw parse_error("scenario: 'trace' must be an object");
        check_keys(*it,
                   {"frequency_hz", "tx_power_dbm", "max_reflections", "max_transmissions",
                    "tessellation_factor", "capture_alpha", "min_power_dbm", "threads"},
                   "scenario trace");
        const json& tr = *it;
        const auto tnum = [&](const char* key, double fallback) {
            const auto f = tr.find(key);
            if (f == tr.end()) return fallback;
            if (!f->is_number())
                throw parse_error(std::string("scenario trace: '") + key + "' must be a number");
            return f->get<double>();
        };
        const auto tint = [&](const char* key, int fallback) {
            const auto f = tr.find(key);
            if (f == tr.end()) return fallback;
            if (!f->is_number_integer())
                throw parse_error(std::string("scenario trace: '") + key +
                                  "' must be an integer");
            return f->get<int>();
        };
        cfg.trace.frequency_hz = tnum("frequency_hz", cfg.trace.frequency_hz);
        cfg.trace.tx_power_dbm = tnum("tx_power_dbm", cfg.trace.tx_power_dbm);
        cfg.trace.max_reflections = tint("max_reflections", cfg.trace.max_reflections);
        cfg.trace.max_transmissions = tint("max_transmissions", cfg.trace.max_transmissions);
        cfg.trace.tessellation_factor =
            tint("tessellation_factor", cfg.trace.tessellation_factor);
        cfg.trace.capture_alpha = tnum("capture_alpha", cfg.trace.capture_alpha);
        cfg.trace.min_power_dbm = tnum("min_power_dbm", cfg.trace.min_power_dbm);
        cfg.trace.threads = tint("threads", cfg.trace.threads);
    }

    cfg.validate();
    return cfg;
}

void export_cdf(const SeriesStats& series, std::ostream& out) {
    out << "error_m,cumulative_fraction\n";
    const std::size_t n = series.sorted_errors.size();
    for (std::size_t i = 0; i < n; ++i) {
        out << detail::csv_num(series.sorted_errors[i]) << ','
            << detail::csv_num(static_cast<double>(i + 1) / static_cast<double>(n)) << '\n';
    }
}

void write_outputs(const ErrorStats& stats, const std::string& dir) {
    fs::create_directories(dir);

    std::ostringstream per_user;
    per_user << "bs_count,user,x,y,z,bs_used,bs_indices,los_links,primary_los,"
                "primary_distance_m,rms_error_m,mean_error_m,median_error_m,max_error_m,"
                "trials\n";
    for (const SeriesStats& s : stats.series) {
        for (const UserOutcome& u : s.users) {
            std::string ids;
            for (std::size_t i = 0; i < u.bs_indices.size(); ++i) {
                if (i) ids += ';';
                ids += std::to_string(u.bs_indices[i]);
            }
            per_user << s.bs_count << ',' << u.user << ',' << detail::csv_num(u.position.x)
                     << ',' << detail::csv_num(u.position.y) << ','
                     << detail::csv_num(u.position.z) << ',' << u.bs_used << ',' << ids << ','
                     << u.los_links << ',' << (u.los ? 1 : 0) << ','
                     << detail::csv_num(u.link_distance_m) << ','
                     << detail::csv_num(u.rms_error_m) << ',' << detail::csv_num(u.mean_error_m)
                     << ',' << detail::csv_num(u.median_error_m) << ','
                     << detail::csv_num(u.max_error_m) << ',' << u.trials_used << '\n';
        }
    }
    write_file(fs::path(dir) / "per_user.csv", per_user.str());

    const double inf = std::numeric_limits<double>::infinity();
    struct Bin {
        const char* label;
        double lo, hi;
    };
    const Bin bins[] = {{"<10m", 0.0, 10.0}, {"10-25m", 10.0, 25.0}, {"all", 0.0, inf}};

    std::ostringstream summary;
    summary << "bs_count,link_class,distance_bin,users,mean_rms_m,median_rms_m,p90_rms_m,"
               "max_rms_m\n";
    const auto emit = [&](int bs_count, const char* cls, const char* bin,
                          const std::vector<double>& values) {
        if (values.empty()) return;
        const SampleStats st = sample_stats(values);
        summary << bs_count << ',' << cls << ',' << bin << ',' << st.count << ','
                << detail::csv_num(st.mean) << ',' << detail::csv_num(st.median) << ','
                << detail::csv_num(st.p90) << ',' << detail::csv_num(st.max) << '\n';
    };
    for (const SeriesStats& s : stats.series) {
        for (const bool los : {true, false}) {
            for (const Bin& bin : bins) {
                std::vector<double> values;
                for (const UserOutcome& u : s.users)
                    if (u.los == los && u.link_distance_m >= bin.lo &&
                        u.link_distance_m < bin.hi)
                        values.push_back(u.rms_error_m);
                emit(s.bs_count, los ? "los" : "nlos", bin.label, values);
            }
        }
        std::vector<double> nlos_links;
        for (const UserOutcome& u : s.users)
            if (u.los_links == 0) nlos_links.push_back(u.rms_error_m);
        emit(s.bs_count, "all_links_nlos", "all", nlos_links);
        emit(s.bs_count, "all", "all", s.sorted_errors);
    }
    write_file(fs::path(dir) / "summary.csv", summary.str());

    for (const SeriesStats& s : stats.series) {
        std::ostringstream cdf;
        export_cdf(s, cdf);
        write_file(fs::path(dir) / ("cdf_" + std::to_string(s.bs_count) + "bs.csv"), cdf.str());
    }
}

}  // namespace rayloc
