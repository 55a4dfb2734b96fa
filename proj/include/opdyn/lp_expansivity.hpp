#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "opdyn/rates.hpp"
#include "opdyn/verdict.hpp"

namespace opdyn {

/// mu_n(f^{-n}({x})) in log domain; zero when the preimage is empty.
inline LogReal lp_criterion_log(const AtomicSystem& sys, const AtomId& x, std::int64_t n) {
    const auto y = sys.preimage(x, n);
    if (!y) return LogReal::zero();
    const LogScalar w = cocycle_log(sys, *y, n);
    if (w.is_zero()) return LogReal::zero();
    return LogReal::from_log(sys.p_double() * w.mod.lg + sys.log_mass(*y));
}

namespace detail {

constexpr double kDivergenceThreshold = 1e6;  // witness: value exceeds 1e6 x value at n=1

inline Witness scan_witness(const AtomicSystem& sys, const AtomId& x, std::int64_t horizon,
                            int direction, double threshold = kDivergenceThreshold) {
    // first threshold crossing along the chosen direction, else the largest value seen
    const LogReal base = lp_criterion_log(sys, x, direction);
    const double bar = (base.is_zero() ? 0.0 : base.lg) + std::log(threshold);
    Witness best{x, 0, lp_criterion_log(sys, x, 0).log10_value()};
    double best_lg = lp_criterion_log(sys, x, 0).lg;
    for (std::int64_t k = 1; k <= horizon; ++k) {
        const std::int64_t n = direction * k;
        const LogReal v = lp_criterion_log(sys, x, n);
        if (!v.is_zero() && v.lg > bar) return {x, n, v.log10_value()};
        if (v.lg > best_lg) {
            best_lg = v.lg;
            best = {x, n, v.log10_value()};
        }
    }
    return best;
}

inline Witness scan_bounded_witness(const AtomicSystem& sys, const AtomId& x,
                                    std::int64_t horizon, bool both_sides) {
    Witness best{x, 0, lp_criterion_log(sys, x, 0).log10_value()};
    double best_lg = lp_criterion_log(sys, x, 0).lg;
    for (std::int64_t n = 1; n <= horizon; ++n) {
        for (int s : {+1, -1}) {
            if (s < 0 && !both_sides) continue;
            const LogReal v = lp_criterion_log(sys, x, s * n);
            if (v.lg > best_lg) {
                best_lg = v.lg;
                best = {x, s * n, v.log10_value()};
            }
        }
    }
    return best;
}

inline GrowthProfile orbit_profile(const AtomicSystem& sys, std::int32_t i,
                                   const OrbitGrowth& g, std::int64_t horizon) {
    GrowthProfile row;
    row.atom = {i, 0};
    const double pd = sys.p_double();
    if (g.eventually_empty_plus) {
        row.lambda_plus = std::nullopt;
    } else if (g.plus) {
        row.lambda_plus = g.plus->rate(pd);
    }
    if (g.minus) row.lambda_minus = g.minus->rate(pd);
    const std::int64_t scan = std::min<std::int64_t>(horizon, 64);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::int64_t n = -scan; n <= scan; ++n) {
        if (n < 0 && !sys.invertible()) continue;
        mx = std::max(mx, lp_criterion_log(sys, row.atom, n).log10_value());
    }
    row.transient_max_log10 = mx;
    return row;
}

}  // namespace detail

// Expansivity on L^p: the operator is expansive iff the measure sequence
// mu_n(f^{-n}(B)) is unbounded over n for every finite-measure set B. By
// monotonicity in B and atomicity it is enough to test singletons, and on
// finitely presented orbits the singleton suprema are decided exactly by the
// per-period growth factors of the two tails.
inline Verdict analyze_expansive_lp(const AtomicSystem& sys, std::int64_t horizon,
                                    double threshold = detail::kDivergenceThreshold) {
    require_invertible(sys, "bilateral expansivity");
    Verdict v;
    v.horizon = horizon;
    v.status = Status::ProvenTrue;
    for (std::size_t i = 0; i < sys.orbits.size(); ++i) {
        const auto idx = static_cast<std::int32_t>(i);
        const OrbitGrowth g = orbit_growth(sys, idx, /*with_mass=*/true);
        v.rate_data.push_back(detail::orbit_profile(sys, idx, g, horizon));
        const int sp = g.plus->rate_sign(sys.p);
        const int sm = g.minus->rate_sign(sys.p);
        if (sp <= 0 && sm <= 0 && v.status == Status::ProvenTrue) {
            v.status = Status::ProvenFalse;
            v.witness = detail::scan_bounded_witness(sys, {idx, 0}, horizon, true);
            v.detail = "orbit " + std::to_string(i) +
                       ": both tail rates are nonpositive, so every singleton keeps a bounded "
                       "criterion sequence";
        }
    }
    if (v.status == Status::ProvenTrue) {
        const auto& g0 = v.rate_data.front();
        const int dir =
            (g0.lambda_plus && *g0.lambda_plus > 0) ? +1 : -1;
        v.witness = detail::scan_witness(sys, g0.atom, horizon, dir, threshold);
        v.detail = "every orbit has a positive tail rate in some direction";
    }
    return v;
}

// Average expansivity: Cesaro means of mu_j(f^{-j}(B))^(1/p) over |j| <= n.
// An exponentially growing term sequence beats the 1/(2n+1) factor and a
// sequence with nonpositive rates in both directions stays bounded, so the
// decision coincides with the plain criterion on this class; the witness scan
// reports the Cesaro means themselves.
inline Verdict analyze_average_expansive_lp(const AtomicSystem& sys, std::int64_t horizon,
                                            double threshold = detail::kDivergenceThreshold) {
    require_invertible(sys, "average expansivity");
    Verdict v = analyze_expansive_lp(sys, horizon, threshold);
    if (!v.witness) return v;
    const AtomId x = v.witness->atom;
    const double inv_p = 1.0 / sys.p_double();
    LogReal sum = pow(lp_criterion_log(sys, x, 0), inv_p);
    Witness w{x, 0, sum.log10_value()};
    double best = -std::numeric_limits<double>::infinity();
    for (std::int64_t n = 1; n <= horizon; ++n) {
        sum += pow(lp_criterion_log(sys, x, n), inv_p);
        sum += pow(lp_criterion_log(sys, x, -n), inv_p);
        const double mean_lg = sum.lg - std::log(static_cast<double>(2 * n + 1));
        if (mean_lg > best) {
            best = mean_lg;
            w = {x, n, mean_lg / std::log(10.0)};
        }
    }
    v.witness = w;
    return v;
}

// Uniform expansivity: a partition of the finite-measure sets must make the
// normalized criterion diverge uniformly on each class. Atoms are grouped
// into finitely many regions (infinite tail regions, finite cores, cycles);
// a class containing an infinite region diverges uniformly iff the region's
// own within-region rate is positive, and a region admitting neither sign
// defeats every partition with a sequence of flat singletons.
inline Verdict analyze_uniform_expansive_lp(const AtomicSystem& sys, std::int64_t horizon,
                                            double threshold = detail::kDivergenceThreshold) {
    require_invertible(sys, "uniform expansivity");
    Verdict v;
    v.horizon = horizon;
    v.status = Status::ProvenTrue;
    std::string partition;
    for (std::size_t i = 0; i < sys.orbits.size(); ++i) {
        const auto idx = static_cast<std::int32_t>(i);
        const Orbit& o = sys.orbits[i];
        const OrbitGrowth g = orbit_growth(sys, idx, true);
        const int sp = g.plus->rate_sign(sys.p);
        const int sm = g.minus->rate_sign(sys.p);
        const double pd = sys.p_double();

        struct Region {
            const char* label;
            AtomId rep;
            AtomId deep;  // witness atom for a region defeat
            bool plus_ok, minus_ok;
            double rate_plus, rate_minus;
        };
        std::vector<Region> regions;
        if (o.kind == MapKind::Cycle) {
            regions.push_back({"cycle", {idx, 0}, {idx, 0}, sp > 0, sp < 0, g.plus->rate(pd),
                               -g.plus->rate(pd)});
        } else {
            // tail-region members eventually cross into the opposite tail, so
            // an assignment needs growth both inside the region and after the
            // crossing; core atoms only need their own eventual rate
            const std::int64_t bps = o.backward_periodic_start();
            const std::int64_t fps = o.forward_periodic_start();
            regions.push_back({"backward", {idx, bps}, {idx, bps - horizon}, sp > 0,
                               sp < 0 && sm > 0, g.plus->rate(pd), -g.plus->rate(pd)});
            regions.push_back({"forward", {idx, fps}, {idx, fps + horizon},
                               sm < 0 && sp > 0, sm > 0, -g.minus->rate(pd),
                               g.minus->rate(pd)});
            if (bps + 2 <= fps) {
                const std::int64_t rep = std::clamp<std::int64_t>(0, bps + 1, fps - 1);
                regions.push_back({"core", {idx, rep}, {idx, rep}, sp > 0, sm > 0,
                                   g.plus->rate(pd), g.minus->rate(pd)});
            }
        }
        for (const Region& r : regions) {
            GrowthProfile row = detail::orbit_profile(sys, idx, g, horizon);
            row.atom = r.rep;
            if (r.plus_ok) {
                row.assignment = '+';
                partition += std::string(partition.empty() ? "" : ", ") + "orbit " +
                             std::to_string(i) + " " + r.label + " -> +";
            } else if (r.minus_ok) {
                row.assignment = '-';
                partition += std::string(partition.empty() ? "" : ", ") + "orbit " +
                             std::to_string(i) + " " + r.label + " -> -";
            } else {
                row.assignment = 'x';
                if (v.status == Status::ProvenTrue) {
                    v.status = Status::ProvenFalse;
                    v.witness = detail::scan_bounded_witness(sys, r.deep, horizon, true);
                    v.detail = "orbit " + std::to_string(i) + " " + r.label +
                               " region admits neither class: its members keep the class "
                               "infimum bounded";
                }
            }
            v.rate_data.push_back(row);
        }
    }
    if (v.status == Status::ProvenTrue) {
        v.detail = "partition: " + partition;
        for (const auto& row : v.rate_data) {
            if (row.assignment == '+') {
                v.witness = detail::scan_witness(sys, row.atom, horizon, +1, threshold);
                break;
            }
            if (row.assignment == '-') {
                v.witness = detail::scan_witness(sys, row.atom, horizon, -1, threshold);
                break;
            }
        }
    }
    return v;
}

enum class PositiveNotion { Positive, AveragePositive, UniformPositive };

// Forward-only variants; no invertibility is required. On a unilateral chain
// every atom sits finitely many steps from the head, so f^{-n} of a singleton
// is eventually empty and the forward criterion sequence is eventually zero;
// every positive notion therefore fails as soon as a unilateral orbit exists.
inline Verdict analyze_positive_variants_lp(const AtomicSystem& sys, std::int64_t horizon,
                                            PositiveNotion notion,
                                            double threshold = detail::kDivergenceThreshold) {
    Verdict v;
    v.horizon = horizon;
    v.status = Status::ProvenTrue;
    const double pd = sys.p_double();
    for (std::size_t i = 0; i < sys.orbits.size(); ++i) {
        const auto idx = static_cast<std::int32_t>(i);
        const Orbit& o = sys.orbits[i];
        const OrbitGrowth g = orbit_growth(sys, idx, true);
        v.rate_data.push_back(detail::orbit_profile(sys, idx, g, horizon));
        auto fail = [&](const AtomId& at, const std::string& why) {
            if (v.status != Status::ProvenTrue) return;
            v.status = Status::ProvenFalse;
            v.witness = detail::scan_bounded_witness(sys, at, horizon, false);
            v.detail = "orbit " + std::to_string(i) + ": " + why;
        };
        if (g.eventually_empty_plus) {
            fail({idx, 0},
                 "unilateral chain: the head singleton has an eventually empty preimage, so its "
                 "forward criterion sequence is eventually zero");
            continue;
        }
        if (const auto z = orbit_zero_weight_position(sys, idx)) {
            // atoms forward of a zero weight cross it and stay at exactly zero
            fail({idx, *z + 1}, "a zero weight at coordinate " + std::to_string(*z) +
                                    " annihilates every forward sequence past it");
            continue;
        }
        const int sp = g.plus->rate_sign(sys.p);
        const int sm = g.minus->rate_sign(sys.p);
        switch (notion) {
            case PositiveNotion::Positive:
            case PositiveNotion::AveragePositive:
                if (sp <= 0)
                    fail({idx, 0}, "forward rate nonpositive: singleton sequences stay bounded");
                break;
            case PositiveNotion::UniformPositive:
                // the infimum runs over all atoms with no partition: every
                // region must diverge forward
                if (sp <= 0) {
                    fail({idx, 0}, "forward rate nonpositive on the backward region");
                } else if (o.kind == MapKind::BilateralChain && sm >= 0) {
                    fail({idx, o.forward_periodic_start() + horizon},
                         "forward-region atoms reach backward through the forward tail at a "
                         "nonpositive rate, so the global infimum stays bounded");
                }
                break;
        }
        (void)pd;
    }
    if (v.status == Status::ProvenTrue) {
        v.witness = detail::scan_witness(sys, v.rate_data.front().atom, horizon, +1, threshold);
        v.detail = "forward rates positive across all orbits and regions";
    }
    return v;
}

inline Verdict analyze_lp(const AtomicSystem& sys, Notion notion, std::int64_t horizon,
                          double threshold = detail::kDivergenceThreshold) {
    switch (notion) {
        case Notion::Expansive: return analyze_expansive_lp(sys, horizon, threshold);
        case Notion::Average: return analyze_average_expansive_lp(sys, horizon, threshold);
        case Notion::Uniform: return analyze_uniform_expansive_lp(sys, horizon, threshold);
        case Notion::Positive:
            return analyze_positive_variants_lp(sys, horizon, PositiveNotion::Positive,
                                                threshold);
        case Notion::AveragePositive:
            return analyze_positive_variants_lp(sys, horizon, PositiveNotion::AveragePositive,
                                                threshold);
        case Notion::UniformPositive:
            return analyze_positive_variants_lp(sys, horizon, PositiveNotion::UniformPositive,
                                                threshold);
    }
    throw OpdynError(Errc::PreconditionFailed, "unknown notion");
}

}  // namespace opdyn
