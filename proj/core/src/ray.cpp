#include "rayloc/ray.hpp"

namespace rayloc {

std::string signature_to_string(const Signature& sig) {
    if (sig.empty()) return "direct";
    std::string out;
    for (std::size_t i = 0; i < sig.size(); ++i) {
        if (i) out += '|';
        out += interaction_code(sig[i].kind);
        out += ':';
        out += sig[i].surface_id;
    }
    return out;
}

}  // namespace rayloc
