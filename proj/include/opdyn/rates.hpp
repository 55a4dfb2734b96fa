#pragma once

#include <cstdint>
#include <optional>

#include "opdyn/atomic_system.hpp"

namespace opdyn {

// One period of an eventually geometric sequence. Advancing by `period` steps
// multiplies the sequence by |A|^(weight_exp * p_eff) * mass_factor, where A is
// the weight-block product, kept as its squared modulus so the comparison with
// 1 stays inside exact rational arithmetic for any rational exponent p = a/b:
//
//   |A|^(e*p) * m  >  1   <=>   (|A|^2)^(e*a) * m^(2b)  >  1.
struct PeriodFactor {
    Rational weight_abs2 = 1;
    Rational mass_factor = 1;
    std::int64_t period = 1;
    int weight_exp = 0;

    bool hits_zero() const { return weight_abs2 == 0 && weight_exp > 0; }

    /// Exact sign of the per-step growth rate; p_eff is the exponent on |A|.
    int rate_sign(const Rational& p_eff) const {
        if (weight_abs2 == 0) {
            if (weight_exp > 0) return -1;  // the sequence is eventually exactly 0
            if (weight_exp < 0)
                throw OpdynError(Errc::ZeroWeight, "inverse weight block hits zero");
            // fall through: pure mass factor
        }
        const long long a = numerator(p_eff).convert_to<long long>();
        const long long b = denominator(p_eff).convert_to<long long>();
        Rational lhs = rat_pow(mass_factor, 2 * b);
        if (weight_exp != 0 && weight_abs2 != 0)
            lhs *= rat_pow(weight_abs2, a * weight_exp);
        if (lhs > 1) return 1;
        if (lhs < 1) return -1;
        return 0;
    }

    /// Per-step growth rate as a double (natural log per step).
    double rate(double p_eff) const {
        if (hits_zero()) return -std::numeric_limits<double>::infinity();
        double lg = log_rational(mass_factor);
        if (weight_exp != 0 && weight_abs2 != 0)
            lg += 0.5 * log_rational(weight_abs2) * p_eff * weight_exp;
        return lg / static_cast<double>(period);
    }

    PeriodFactor inverse() const {
        if (weight_abs2 == 0)
            throw OpdynError(Errc::ZeroWeight, "inverting a vanishing period factor");
        return {weight_abs2, Rational(1) / mass_factor, period, -weight_exp};
    }
};

inline Rational tail_block_abs2(const TailSpec& t) {
    Rational prod(1);
    for (const auto& w : t.periodic_weights) prod *= w.abs2();
    return prod;
}

/// First coordinate carrying a zero weight on the orbit, if any. Zeros in the
/// periodic blocks already force a vanishing block product; zeros hiding in
/// the window or the transients are what this finds: every atom forward of
/// one has an eventually exactly-zero forward criterion sequence.
inline std::optional<std::int64_t> orbit_zero_weight_position(const AtomicSystem& sys,
                                                              std::int32_t orbit_idx) {
    const Orbit& o = sys.orbit(orbit_idx);
    for (const auto& [q, e] : o.overrides)
        if (e.weight.is_zero()) return q;
    auto scan_tail = [](const TailSpec& t) -> std::optional<std::int64_t> {
        for (std::size_t j = 0; j < t.transient.size(); ++j)
            if (t.transient[j].weight.is_zero()) return static_cast<std::int64_t>(j + 1);
        for (const auto& w : t.periodic_weights)
            if (w.is_zero()) return static_cast<std::int64_t>(t.transient.size() + 1);
        return std::nullopt;
    };
    if (o.forward)
        if (auto slot = scan_tail(*o.forward)) return o.window_hi() + *slot;
    if (o.backward)
        if (auto slot = scan_tail(*o.backward)) return o.window_lo() - *slot;
    return std::nullopt;
}

inline Rational cycle_block_abs2(const AtomicSystem& sys, std::int32_t orbit_idx) {
    const Orbit& o = sys.orbit(orbit_idx);
    Rational prod(1);
    for (std::int64_t q = 0; q < o.cycle_length; ++q)
        prod *= sys.atom({orbit_idx, q}).weight.abs2();
    return prod;
}

// Per-orbit growth data for the measure sequence n |-> mu_n(f^{-n}({x})). The
// rates are the same for every atom of the orbit: the n -> +inf behaviour is
// driven by the backward tail, the n -> -inf behaviour by the forward tail.
struct OrbitGrowth {
    bool eventually_empty_plus = false;  // unilateral chains: f^{-n}({x}) = {} eventually
    std::optional<PeriodFactor> plus;    // per-period factor for n -> +inf
    std::optional<PeriodFactor> minus;   // per-period factor for n -> -inf
};

/// Growth of mu_n(f^{-n}{x}) on L^p: weights enter with exponent p, masses
/// with the tail mass ratios. Pass mass_exp = 0, p_eff = 1 for the sup-norm
/// quantities of the continuous-function-space criteria.
inline OrbitGrowth orbit_growth(const AtomicSystem& sys, std::int32_t orbit_idx,
                                bool with_mass) {
    const Orbit& o = sys.orbit(orbit_idx);
    OrbitGrowth g;
    switch (o.kind) {
        case MapKind::Cycle: {
            const Rational a2 = cycle_block_abs2(sys, orbit_idx);
            g.plus = PeriodFactor{a2, Rational(1), o.cycle_length, +1};
            if (a2 != 0) g.minus = g.plus->inverse();
            break;
        }
        case MapKind::BilateralChain: {
            g.plus = PeriodFactor{tail_block_abs2(*o.backward),
                                  with_mass ? o.backward->mass_ratio : Rational(1),
                                  o.backward->period, +1};
            g.minus = PeriodFactor{tail_block_abs2(*o.forward),
                                   with_mass ? o.forward->mass_ratio : Rational(1),
                                   o.forward->period, -1};
            break;
        }
        case MapKind::UnilateralChain: {
            g.eventually_empty_plus = true;
            break;
        }
    }
    return g;
}

// Within-region growth rates for the uniform criteria. Regions are what the
// infimum over a partition class actually sees: the two infinite tail regions
// of a chain, the finite core (window plus transients), and whole cycles.
//
// With G+ the per-period factor of the + direction and G- that of the -
// direction, uniform divergence over a region holds under:
//   backward region:  + needs G+ > 1,      - needs G+ < 1
//   forward  region:  + needs G- < 1,      - needs G- > 1
//   core atoms:       + needs G+ > 1,      - needs G- > 1
//   cycle:            + needs G+ > 1,      - needs G+ < 1
// A region admitting neither sign defeats every partition: its flat members
// keep the class infimum bounded at every time.
struct RegionClass {
    std::int32_t orbit;
    enum Kind { BackwardRegion, ForwardRegion, Core, CycleRegion } kind;
    int plus_ok;   // +1 assignable to the + class
    int minus_ok;  // +1 assignable to the - class
};

}  // namespace opdyn
