#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "opdyn/rates.hpp"
#include "opdyn/verdict.hpp"

namespace opdyn {

// Discrete models of the continuous-function spaces: the bornology base is
// {X} for the sup-norm spaces and the finite atom sets for compact- and
// pointwise-convergence (compact = finite on a discrete space).
enum class SpaceKind { BoundedFunctions, VanishingAtInfinity, CompactConvergence, PointwiseConvergence };

inline const char* space_name(SpaceKind s) {
    switch (s) {
        case SpaceKind::BoundedFunctions: return "lb";
        case SpaceKind::VanishingAtInfinity: return "c0";
        case SpaceKind::CompactConvergence: return "compact";
        case SpaceKind::PointwiseConvergence: return "pointwise";
    }
    return "?";
}

inline SpaceKind space_from(const std::string& s) {
    for (SpaceKind k : {SpaceKind::BoundedFunctions, SpaceKind::VanishingAtInfinity,
                        SpaceKind::CompactConvergence, SpaceKind::PointwiseConvergence})
        if (s == space_name(k)) return k;
    throw std::invalid_argument("unknown space: " + s);
}

inline bool whole_space_bornology(SpaceKind s) {
    return s == SpaceKind::BoundedFunctions || s == SpaceKind::VanishingAtInfinity;
}

// Basic open set O (a singleton in the discrete topology) together with a
// bornology member B; no B means all of X.
struct TestPair {
    AtomId O;
    std::optional<std::vector<AtomId>> B;
};

/// ||w^(n)|| over B cap f^{-n}(O): the single value |w^(n)(f^{-n}(O))| when the
/// preimage atom exists and lies in B, and 0 otherwise (sup over the empty set).
inline LogReal criterion_value_log(const AtomicSystem& sys, const TestPair& pair,
                                   std::int64_t n) {
    const auto y = sys.preimage(pair.O, n);
    if (!y) return LogReal::zero();
    if (pair.B) {
        bool found = false;
        for (const AtomId& b : *pair.B)
            if (sys.normalize_position(sys.orbit(b.orbit), b.position) == y->position &&
                b.orbit == y->orbit) {
                found = true;
                break;
            }
        if (!found) return LogReal::zero();
    }
    return cocycle_log(sys, *y, n).mod;
}

inline double criterion_value(const AtomicSystem& sys, const TestPair& pair, std::int64_t n) {
    return criterion_value_log(sys, pair, n).value();
}

namespace detail_cfs {

inline Witness scan(const AtomicSystem& sys, const AtomId& o_atom, std::int64_t horizon,
                    int direction, bool both_sides) {
    const TestPair pair{o_atom, std::nullopt};
    Witness best{o_atom, 0, criterion_value_log(sys, pair, 0).log10_value()};
    double best_lg = criterion_value_log(sys, pair, 0).lg;
    for (std::int64_t k = 1; k <= horizon; ++k) {
        for (int s : {direction, -direction}) {
            if (s != direction && !both_sides) continue;
            const LogReal v = criterion_value_log(sys, pair, s * k);
            if (v.lg > best_lg) {
                best_lg = v.lg;
                best = {o_atom, s * k, v.log10_value()};
            }
        }
    }
    return best;
}

struct CfsSigns {
    bool unilateral = false;
    int plus = 0;   // growth sign of |w^(n)(f^{-n}a)| as n -> +inf
    int minus = 0;  // growth sign as n -> -inf
    double rate_plus = 0, rate_minus = 0;
};

inline CfsSigns orbit_signs(const AtomicSystem& sys, std::int32_t idx) {
    const OrbitGrowth g = orbit_growth(sys, idx, /*with_mass=*/false);
    CfsSigns s;
    if (g.eventually_empty_plus) {
        s.unilateral = true;
        return s;
    }
    const Rational one(1);
    s.plus = g.plus->rate_sign(one);
    s.rate_plus = g.plus->rate(1.0);
    if (g.minus && g.minus->weight_abs2 != 0) {
        s.minus = g.minus->rate_sign(one);
        s.rate_minus = g.minus->rate(1.0);
    }
    return s;
}

}  // namespace detail_cfs

/// The sufficient test family of basic open sets from a wandering window:
/// valid when w and 1/w are bounded on X and the f-iterates of W cover every
/// orbit. Only the plain and average notions admit this reduction.
inline std::vector<AtomId> wandering_window_reduction(const AtomicSystem& sys,
                                                      const std::vector<AtomId>& W) {
    if (sys.has_zero_weight())
        throw OpdynError(Errc::PreconditionFailed, "1/w is unbounded (zero weight present)");
    std::set<std::int32_t> covered;
    for (const AtomId& a : W) {
        if (!sys.in_domain(a))
            throw OpdynError(Errc::PreconditionFailed, "window atom outside the space");
        covered.insert(a.orbit);
    }
    for (std::size_t i = 0; i < sys.orbits.size(); ++i)
        if (!covered.count(static_cast<std::int32_t>(i)))
            throw OpdynError(Errc::PreconditionFailed,
                             "iterates of the window miss orbit " + std::to_string(i));
    return W;
}

// Expansivity on the continuous-function spaces. The quantifier over basic
// open sets collapses to one representative per orbit (the criterion sequence
// of a singleton depends only on its orbit), and the existential search over
// bornology members is decided exactly: the whole space for sup-norm spaces,
// and unions of cycles for the finite-set bornologies, where any chain orbit
// meets each finite B only finitely often and so defeats every candidate.
inline Verdict analyze_cfs(const AtomicSystem& sys, SpaceKind space, Notion notion,
                           std::int64_t horizon,
                           const std::optional<std::vector<AtomId>>& restrict_O = std::nullopt) {
    const bool bilateral_notion =
        notion == Notion::Expansive || notion == Notion::Average || notion == Notion::Uniform;
    if (bilateral_notion) require_invertible(sys, "bilateral function-space expansivity");
    if (restrict_O && (notion == Notion::Uniform || notion == Notion::UniformPositive))
        throw OpdynError(Errc::PreconditionFailed,
                         "the window reduction applies to the plain and average notions only");

    std::vector<std::int32_t> orbit_list;
    if (restrict_O) {
        std::set<std::int32_t> seen;
        for (const AtomId& a : *restrict_O) seen.insert(a.orbit);
        orbit_list.assign(seen.begin(), seen.end());
    } else {
        for (std::size_t i = 0; i < sys.orbits.size(); ++i)
            orbit_list.push_back(static_cast<std::int32_t>(i));
    }

    Verdict v;
    v.horizon = horizon;
    v.status = Status::ProvenTrue;
    const bool finite_bornology = !whole_space_bornology(space);
    std::string partition;

    auto fail = [&](const AtomId& at, int dir, bool both, const std::string& why) {
        if (v.status != Status::ProvenTrue) return;
        v.status = Status::ProvenFalse;
        v.witness = detail_cfs::scan(sys, at, horizon, dir, both);
        v.detail = why;
    };
    // chain escape on a finite-set bornology: past this time the criterion is
    // exactly zero for every candidate B inside the scan radius
    auto fail_escaped = [&](const AtomId& at, const std::string& why) {
        if (v.status != Status::ProvenTrue) return;
        v.status = Status::ProvenFalse;
        v.witness = Witness{at, 2 * horizon + 1,
                            -std::numeric_limits<double>::infinity()};
        v.detail = why;
    };

    for (std::int32_t idx : orbit_list) {
        const Orbit& o = sys.orbit(idx);
        const detail_cfs::CfsSigns s = detail_cfs::orbit_signs(sys, idx);
        GrowthProfile row;
        row.atom = {idx, 0};
        if (!s.unilateral) row.lambda_plus = s.rate_plus;
        if (!s.unilateral && o.kind != MapKind::UnilateralChain) row.lambda_minus = s.rate_minus;
        const bool is_cycle = o.kind == MapKind::Cycle;
        const bool is_chain = !is_cycle;
        const std::string tag = "orbit " + std::to_string(idx);

        switch (notion) {
            case Notion::Expansive:
            case Notion::Average:
                if (finite_bornology) {
                    if (is_chain)
                        fail_escaped({idx, 0},
                                     tag + ": a chain meets every finite bornology member "
                                           "finitely often, so no B yields an unbounded "
                                           "criterion");
                    else if (s.plus == 0)
                        fail({idx, 0}, +1, true,
                             tag + ": the cycle weight product has modulus 1");
                } else {
                    if (s.plus <= 0 && s.minus <= 0)
                        fail({idx, 0}, +1, true, tag + ": both weight-product rates nonpositive");
                }
                break;
            case Notion::Positive:
            case Notion::AveragePositive:
                if (s.unilateral) {
                    fail({idx, 0}, +1, false,
                         tag + ": unilateral chain, forward preimages are eventually empty");
                } else if (auto z = orbit_zero_weight_position(sys, idx)) {
                    fail({idx, *z + 1}, +1, false,
                         tag + ": a zero weight annihilates forward sequences past coordinate " +
                             std::to_string(*z));
                } else if (finite_bornology) {
                    if (is_chain)
                        fail_escaped({idx, 0},
                                     tag + ": chain escapes every finite bornology member "
                                           "forward");
                    else if (s.plus <= 0)
                        fail({idx, 0}, +1, false, tag + ": cycle weight product has modulus <= 1");
                } else if (s.plus <= 0) {
                    fail({idx, 0}, +1, false, tag + ": backward weight products do not grow");
                }
                break;
            case Notion::Uniform: {
                struct Region {
                    const char* label;
                    AtomId rep;
                    AtomId deep;
                    bool plus_ok, minus_ok;
                };
                std::vector<Region> regions;
                if (finite_bornology) {
                    if (is_chain) {
                        fail_escaped({idx, 0},
                                     tag + ": chain atoms escape every finite B in both "
                                           "directions");
                        row.assignment = 'x';
                        break;
                    }
                    regions.push_back({"cycle", {idx, 0}, {idx, 0}, s.plus > 0, s.plus < 0});
                } else if (is_cycle) {
                    regions.push_back({"cycle", {idx, 0}, {idx, 0}, s.plus > 0, s.plus < 0});
                } else {
                    // tail members cross into the opposite tail; see the L^p engine
                    const std::int64_t bps = o.backward_periodic_start();
                    const std::int64_t fps = o.forward_periodic_start();
                    regions.push_back({"backward", {idx, bps}, {idx, bps - horizon},
                                       s.plus > 0, s.plus < 0 && s.minus > 0});
                    regions.push_back({"forward", {idx, fps}, {idx, fps + horizon},
                                       s.minus < 0 && s.plus > 0, s.minus > 0});
                    if (bps + 2 <= fps) {
                        const std::int64_t rep = std::clamp<std::int64_t>(0, bps + 1, fps - 1);
                        regions.push_back({"core", {idx, rep}, {idx, rep}, s.plus > 0,
                                           s.minus > 0});
                    }
                }
                for (const Region& r : regions) {
                    GrowthProfile rrow = row;
                    rrow.atom = r.rep;
                    if (r.plus_ok) {
                        rrow.assignment = '+';
                    } else if (r.minus_ok) {
                        rrow.assignment = '-';
                    } else {
                        rrow.assignment = 'x';
                        fail(r.deep, +1, true,
                             tag + " " + r.label + " region admits neither partition class");
                    }
                    partition += std::string(partition.empty() ? "" : ", ") + tag + " " +
                                 r.label + " -> " + rrow.assignment;
                    v.rate_data.push_back(rrow);
                }
                continue;  // rows already recorded
            }
            case Notion::UniformPositive:
                if (s.unilateral) {
                    fail({idx, 0}, +1, false, tag + ": unilateral chain defeats a global infimum");
                } else if (auto z = orbit_zero_weight_position(sys, idx)) {
                    fail({idx, *z + 1}, +1, false,
                         tag + ": a zero weight annihilates forward sequences past coordinate " +
                             std::to_string(*z));
                } else if (finite_bornology) {
                    if (is_chain)
                        fail_escaped({idx, 0},
                                     tag + ": chain escapes every finite B forward");
                    else if (s.plus <= 0)
                        fail({idx, 0}, +1, false, tag + ": cycle weight product has modulus <= 1");
                } else if (s.plus <= 0) {
                    fail({idx, 0}, +1, false, tag + ": backward region rate nonpositive");
                } else if (is_chain && s.minus >= 0) {
                    fail({idx, o.forward_periodic_start()}, +1, false,
                         tag + ": forward-region atoms keep the global infimum bounded");
                }
                break;
        }
        v.rate_data.push_back(row);
    }

    if (v.status == Status::ProvenTrue) {
        if (notion == Notion::Uniform) v.detail = "partition: " + partition;
        else if (finite_bornology)
            v.detail = "every orbit is a cycle; B = the cycle of each tested O";
        else
            v.detail = "criterion rates positive with B = X";
        int dir = +1;
        AtomId at = v.rate_data.empty() ? AtomId{0, 0} : v.rate_data.front().atom;
        for (const auto& row : v.rate_data) {
            if (row.lambda_plus && *row.lambda_plus > 0) {
                at = row.atom;
                dir = +1;
                break;
            }
            if (row.lambda_minus && *row.lambda_minus > 0) {
                at = row.atom;
                dir = -1;
                break;
            }
        }
        v.witness = detail_cfs::scan(sys, at, horizon, dir, false);
    }
    return v;
}

}  // namespace opdyn
