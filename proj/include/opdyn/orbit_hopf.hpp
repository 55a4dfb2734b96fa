#pragma once

#include <vector>

#include "opdyn/atomic_system.hpp"

namespace opdyn {

// Hopf decomposition of an invertible atomic system. Cycles return to
// themselves under iteration and form the conservative part; bi-infinite
// chains are dissipative, with the coordinate-0 atom of each chain as the
// canonical wandering representative.
struct OrbitDecomposition {
    std::vector<std::int32_t> conservative_orbits;
    std::vector<std::int32_t> dissipative_orbits;
    std::vector<AtomId> wandering_set;  // one representative per dissipative orbit
    Rational wandering_mass = 0;
};

inline OrbitDecomposition hopf_decompose(const AtomicSystem& sys) {
    if (!sys.map_bijective())
        throw OpdynError(Errc::NonInvertibleMap, "Hopf decomposition needs a bijective map");
    OrbitDecomposition d;
    for (std::size_t i = 0; i < sys.orbits.size(); ++i) {
        const auto idx = static_cast<std::int32_t>(i);
        if (sys.orbits[i].kind == MapKind::Cycle) {
            d.conservative_orbits.push_back(idx);
        } else {
            d.dissipative_orbits.push_back(idx);
            const AtomId rep{idx, 0};
            d.wandering_set.push_back(rep);
            d.wandering_mass += sys.atom(rep).mass;
        }
    }
    if (!d.dissipative_orbits.empty() && d.wandering_mass <= 0)
        throw OpdynError(Errc::InfiniteWanderingMass, "wandering set has no positive mass");
    return d;
}

/// True iff the conservative part is mu-null, i.e. there is no cycle.
inline bool is_dissipative(const AtomicSystem& sys) {
    if (!sys.map_bijective())
        throw OpdynError(Errc::NonInvertibleMap, "dissipativity needs a bijective map");
    for (const auto& o : sys.orbits)
        if (o.kind == MapKind::Cycle) return false;
    return true;
}

}  // namespace opdyn
