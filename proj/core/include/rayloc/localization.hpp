#pragma once

#include <array>
#include <string>
#include <vector>

#include "rayloc/indoor_map.hpp"
#include "rayloc/ray.hpp"
#include "rayloc/vec3.hpp"

namespace rayloc {

/// Default clustering distance [m] for grouping candidate locations.
inline constexpr double kDefaultClusterThresholdM = 0.40;

/// Default cap on interactions when back-propagating an observation.
inline constexpr int kDefaultMaxInteractions = 3;

/// One multipath measurement taken at a base station: the departure
/// angle toward the user (user receiving) or the arrival angle of the
/// user's signal (user transmitting) -- both point from the BS into the
/// path -- plus the time of flight along it.
struct PathObservation {
    std::string bs_id;
    Vec3 bs_position;
    AzEl angle;       // [rad]
    double tof_s = 0.0;

    void validate() const;  // throws validation_error
};

/// A hypothesized user position produced by back-solving one observation.
struct CandidateLocation {
    Vec3 position;
    std::string bs_id;
    int observation_index = -1;
    Signature branch_signature;    // interactions along the back-propagated ray
    double residual_length_m = 0.0;  // unspent budget at termination (~0)
};

/// A group of mutually close candidates (single linkage).
struct ClusterEstimate {
    Vec3 centroid;                  // unweighted mean of member positions
    int member_count = 0;
    std::vector<CandidateLocation> members;
    int distinct_observations = 0;  // distinct (bs_id, observation_index) sources
    double rms_radius_m = 0.0;      // rms member distance to centroid
    double mean_residual_m = 0.0;   // mean |residual_length|
};

struct LocateResult {
    Vec3 position;
    bool ambiguous = false;          // single observation, or tied modal clusters
    std::vector<ClusterEstimate> clusters;  // all clusters, best first
    int candidate_count = 0;
};

/// Back-propagate one observation through the map: march a ray from the
/// BS along the observed angle with length budget c*tof, branching into
/// a reflected and a transmitted continuation at every surface hit.
/// Every branch endpoint (where the budget runs out) is one candidate;
/// branches needing more than max_interactions interactions are dropped.
/// At most 2^max_interactions candidates. Throws validation_error when
/// the budget is non-positive.
std::vector<CandidateLocation> generate_candidates(const IndoorMap& map,
                                                   const PathObservation& obs,
                                                   int max_interactions = kDefaultMaxInteractions);

/// Single-linkage grouping: candidates sharing a chain of pairwise
/// distances <= threshold end up in one cluster. Clusters are returned
/// best-first (most distinct observations, then largest, then most
/// compact).
std::vector<ClusterEstimate> cluster_candidates(const std::vector<CandidateLocation>& candidates,
                                                double threshold_m = kDefaultClusterThresholdM);

/// Map-assisted position estimate: pool candidates from all
/// observations (any number of base stations), cluster them, and return
/// the centroid of the best cluster. A cluster backed by more distinct
/// observations outranks a merely larger one; ties then break toward
/// more members, smaller rms radius, and smaller mean residual. Throws
/// validation_error when no observations are given or no branch is
/// feasible.
LocateResult locate(const IndoorMap& map, const std::vector<PathObservation>& observations,
                    int max_interactions = kDefaultMaxInteractions,
                    double cluster_threshold_m = kDefaultClusterThresholdM);

/// Planar three-point fix from two relative angles: theta1 subtended at
/// the user by (bs[0], bs[1]) and theta2 by (bs[1], bs[2]). Solved by
/// intersecting the two circles on which the pairs subtend those angles
/// (computed in the xy-plane; the returned z is the mean BS height).
/// Returns 0, 1, or 2 solutions, excluding the BS positions themselves.
/// Throws degenerate_geometry_error when the loci circles coincide (user
/// on the circle through all three base stations).
std::vector<Vec3> three_point_fix(const std::array<Vec3, 3>& bs, double theta1, double theta2);

}  // namespace rayloc
