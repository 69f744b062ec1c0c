#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rayloc/indoor_map.hpp"
#include "rayloc/ray.hpp"
#include "rayloc/vec3.hpp"

namespace rayloc {

struct TraceConfig {
    double frequency_hz = 73e9;
    double tx_power_dbm = 0.0;
    int max_reflections = 3;
    int max_transmissions = 3;
    int tessellation_factor = 50;
    double capture_alpha = 1.0;      // reception-sphere scale factor
    double min_power_dbm = -120.0;   // detection floor
    int threads = 0;                 // 0 = hardware concurrency

    void validate() const;  // throws validation_error
};

/// One resolvable propagation path between TX and RX.
struct MultipathComponent {
    AzEl aod;                     // departure direction at TX [rad]
    AzEl aoa;                     // arrival direction at RX, pointing from RX
                                  // back toward the last interaction [rad]
    double tof_s = 0.0;           // path_length / c
    double path_length_m = 0.0;
    double received_power_dbm = 0.0;
    Signature interactions;       // ordered TX -> RX
    std::vector<Vec3> vertices;   // TX, interaction points..., RX

    int reflection_count() const;
    int transmission_count() const;
};

/// |Gamma| as a linear function of the incidence angle measured from the
/// surface normal, clamped to [0, 1]. Valid for theta_i in [0, pi/2];
/// throws validation_error outside. Reflected power scales as |Gamma|^2.
double reflection_coefficient(double theta_i_rad);

/// Free-space path loss 20*log10(4*pi*d*f/c) [dB].
double fspl_db(double distance_m, double frequency_hz);

/// Received power: tx_power - FSPL(total length) + per-reflection
/// 20*log10|Gamma(theta_i)| - per-transmission material loss.
double path_power_dbm(const TraceConfig& cfg, double path_length_m,
                      std::span<const double> reflection_angles_rad,
                      std::span<const double> transmission_losses_db);

/// Exact geometric path for a given interaction sequence, via successive
/// mirror images of RX through the reflecting surfaces. Returns the
/// vertex list (TX first, RX last) iff every reflection point lands
/// inside its polygon and the intermediate segments cross exactly the
/// listed transmissive surfaces in order; otherwise nullopt.
std::optional<std::vector<Vec3>> refine_path(const IndoorMap& map, const Vec3& tx,
                                             const Vec3& rx, const Signature& signature);

/// Hybrid shooting-bouncing-rays + image-refinement trace. Launches
/// 10*N^2+2 rays from TX, branches into reflected + transmitted rays at
/// every obstruction, captures rays passing within the reception sphere
/// of RX, then refines each captured interaction signature with the
/// method of images. Components are deduplicated by signature, filtered
/// by the power floor, and sorted by (tof, signature).
/// Throws validation_error if tx or rx is outside the map bounds.
std::vector<MultipathComponent> trace(const IndoorMap& map, const Vec3& tx, const Vec3& rx,
                                      const TraceConfig& cfg = {});

/// Whether the open segment tx-rx crosses no surface.
bool line_of_sight(const IndoorMap& map, const Vec3& tx, const Vec3& rx);

}  // namespace rayloc
