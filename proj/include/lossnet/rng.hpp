#pragma once

#include <cmath>
#include <cstdint>

#include "model.hpp"

namespace lossnet {

/// Counter-based random stream: every draw is a pure hash of
/// (seed, replication, role, class, index, sub-index). Draws are therefore
/// reproducible regardless of event interleaving, and two admission policies
/// driven by the same coordinates see identical arrival epochs and service
/// requirements — the coupling the comparison experiments rely on.
namespace rng {

enum class Role : uint64_t {
    Arrival = 1,         // inter-arrival gaps; sub = 0
    Service = 2,         // service requirement of arrival #idx; sub = stage
    Thinning = 3,        // accept/reject coin of arrival #idx
    InitialService = 4,  // residual work of initially-present requests
};

namespace detail {

inline uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

inline uint64_t hash(uint64_t seed, uint64_t rep, Role role, uint64_t cls, uint64_t idx,
                     uint64_t sub = 0) {
    uint64_t h = detail::mix(seed);
    h = detail::mix(h ^ rep);
    h = detail::mix(h ^ static_cast<uint64_t>(role));
    h = detail::mix(h ^ cls);
    h = detail::mix(h ^ idx);
    h = detail::mix(h ^ sub);
    return h;
}

/// Uniform on (0,1), strictly interior, 53-bit resolution.
inline double u01(uint64_t seed, uint64_t rep, Role role, uint64_t cls, uint64_t idx,
                  uint64_t sub = 0) {
    const uint64_t h = hash(seed, rep, role, cls, idx, sub);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
}

inline double exponential(double rate, uint64_t seed, uint64_t rep, Role role, uint64_t cls,
                          uint64_t idx, uint64_t sub = 0) {
    return -std::log(u01(seed, rep, role, cls, idx, sub)) / rate;
}

/// Service requirement draw for the given law. Uses sub-indices 0 and 1 of
/// the (role, cls, idx) coordinate so every law consumes a fixed budget.
inline double sample_service(const ServiceModel& sm, uint64_t seed, uint64_t rep, Role role,
                             uint64_t cls, uint64_t idx) {
    switch (sm.kind) {
        case ServiceKind::Exponential:
            return -std::log(u01(seed, rep, role, cls, idx, 0)) / sm.rate;
        case ServiceKind::Deterministic:
            return sm.d;
        case ServiceKind::HeavyTailExample: {
            // G(s) = 1 - (1+s)^-2  =>  s = 1/sqrt(1-u) - 1
            const double u = u01(seed, rep, role, cls, idx, 0);
            return 1.0 / std::sqrt(1.0 - u) - 1.0;
        }
        case ServiceKind::HyperExponential: {
            const double pick = u01(seed, rep, role, cls, idx, 0);
            double acc = 0.0;
            size_t j = 0;
            for (; j + 1 < sm.probs.size(); ++j) {
                acc += sm.probs[j];
                if (pick < acc) break;
            }
            return -std::log(u01(seed, rep, role, cls, idx, 1)) / sm.rates[j];
        }
    }
    return 0.0;
}

}  // namespace rng
}  // namespace lossnet
