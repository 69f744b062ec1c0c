#pragma once

#include <string>
#include <vector>

#include "rayloc/vec3.hpp"

namespace rayloc {

enum class InteractionKind { reflection, transmission };

inline char interaction_code(InteractionKind k) {
    return k == InteractionKind::reflection ? 'R' : 'T';
}

/// One surface interaction along a traced ray. `surface` indexes into
/// the owning map's surface list.
struct RayInteraction {
    int surface = -1;
    InteractionKind kind = InteractionKind::reflection;
    Vec3 point;
};

/// A ray in flight during tracing: current origin/direction plus the
/// accumulated history since launch.
struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
    double accumulated_length_m = 0.0;
    double accumulated_loss_db = 0.0;
    std::vector<RayInteraction> interactions;
};

/// An interaction referenced by surface id rather than index; the
/// externally visible form used in component signatures.
struct SignatureEntry {
    std::string surface_id;
    InteractionKind kind = InteractionKind::reflection;

    bool operator==(const SignatureEntry&) const = default;
};

using Signature = std::vector<SignatureEntry>;

/// "R:wall_1|T:door_2", or "direct" for the empty signature.
std::string signature_to_string(const Signature& sig);

}  // namespace rayloc
