#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rayloc/indoor_map.hpp"
#include "rayloc/localization.hpp"
#include "rayloc/raytracer.hpp"
#include "rayloc/vec3.hpp"

namespace rayloc {

/// Monte Carlo experiment description: a map, base stations, user count,
/// measurement noise levels, and how many of the nearest covering BSs a
/// user is localized with.
struct ScenarioConfig {
    explicit ScenarioConfig(IndoorMap m) : map(std::move(m)) {}

    std::string name = "scenario";
    IndoorMap map;
    std::vector<Vec3> bs_positions;
    int n_users = 100;
    double sigma_aod_rad = deg_to_rad(0.5);
    double sigma_tof_s = 0.25e-9;
    int n_trials = 100;
    std::uint64_t rng_seed = 1;
    int bs_count_policy = 3;        // evaluate BS counts 1..policy
    int max_obs_per_bs = 0;         // strongest components kept per BS, 0 = all
    // Receiver sensitivity: a BS covers a user only when its strongest
    // traced component reaches this power. Unset means any BS with
    // enough multipath counts, however weak the link.
    std::optional<double> coverage_min_peak_dbm;
    // Optional xy rectangles {x0, y0, x1, y1} users are sampled from,
    // weighted by area. Empty means the whole building footprint.
    std::vector<std::array<double, 4>> user_regions;
    double user_height_m = 1.5;
    int max_interactions = kDefaultMaxInteractions;
    double cluster_threshold_m = kDefaultClusterThresholdM;
    TraceConfig trace;

    void validate() const;  // throws validation_error
};

/// Per-user outcome within one BS-count series.
struct UserOutcome {
    int user = -1;
    Vec3 position;
    int bs_used = 0;
    std::vector<int> bs_indices;   // indices into ScenarioConfig::bs_positions
    int los_links = 0;             // LOS links among the used BSs
    bool los = false;              // primary (nearest used) link is LOS
    double link_distance_m = 0.0;  // 3-D distance to the primary BS
    double rms_error_m = 0.0;
    double mean_error_m = 0.0;
    double median_error_m = 0.0;
    double max_error_m = 0.0;
    int trials_used = 0;
};

/// Results for localization with a fixed BS count. Only users with at
/// least `bs_count` covering base stations participate.
struct SeriesStats {
    int bs_count = 1;
    std::vector<UserOutcome> users;
    std::vector<double> sorted_errors;  // per-user rms errors, ascending

    double percentile(double p) const;  // linear interpolation, p in [0, 100]
    double mean_error() const;
    double median_error() const { return percentile(50.0); }
    double max_error() const;

    /// Mean per-user rms error over users matching (los, distance bin).
    /// The bin is [dmin, dmax); returns nullopt when no user matches.
    std::optional<double> mean_error_where(bool los, double dmin, double dmax) const;
    int count_where(bool los, double dmin, double dmax) const;

    /// Users whose used links are all NLOS.
    std::optional<double> mean_error_all_nlos() const;
    int count_all_nlos() const;
};

struct ErrorStats {
    std::vector<SeriesStats> series;  // one per BS count, 1..policy
    int resampled_users = 0;          // redraws during placement
    int undercovered_users = 0;       // accepted with <2 components at every BS

    const SeriesStats& for_count(int bs_count) const;  // throws validation_error
};

/// Parse a scenario file (JSON); the map path is resolved relative to
/// the scenario file's directory.
ScenarioConfig load_scenario(const std::string& path);

/// Run the Monte Carlo experiment: place users, forward-trace from the
/// nearest covering BSs, perturb AoD (azimuth and elevation
/// independently) and ToF with zero-mean Gaussian noise per trial,
/// localize, and aggregate per-user rms errors. Deterministic for a
/// fixed rng_seed regardless of thread count.
ErrorStats run_scenario(const ScenarioConfig& cfg);

/// Empirical CDF rows "error_m,cumulative_fraction", one per sample.
void export_cdf(const SeriesStats& series, std::ostream& out);

/// Write per_user.csv, summary.csv and cdf_{k}bs.csv into `dir`.
void write_outputs(const ErrorStats& stats, const std::string& dir);

}  // namespace rayloc
