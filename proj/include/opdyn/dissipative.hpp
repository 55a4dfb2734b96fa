#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "opdyn/orbit_hopf.hpp"
#include "opdyn/rates.hpp"
#include "opdyn/verdict.hpp"

namespace opdyn {

struct ChaosClassification {
    bool nu_finite = false;
    Status devaney = Status::Unknown;
    Status mixing = Status::Unknown;
    Status frequently_hypercyclic = Status::Unknown;
    Status frequently_recurrent = Status::Unknown;
    std::string equivalences_note;
};

struct DistortionWitness {
    std::int64_t k = 0;
    std::int32_t orbit_a = 0, orbit_b = 0;
    double ratio_log10 = 0.0;  // spread between the two orbits' transported masses at f^k(W)
};

struct DistortionResult {
    bool bounded = false;
    double K = 1.0;
    std::optional<Rational> K_exact;
    std::vector<DistortionWitness> witnesses;  // diverging-ratio evidence when unbounded
};

struct VerificationReport {
    int samples = 0;
    bool exact_mode = false;
    double max_isometry_dev = 0.0;
    double max_intertwine_dev = 0.0;
    double max_roundtrip_dev = 0.0;
};

// The conjugation package for a dissipative invertible system: the measure nu
// with nu({x}) = |w^(n)(x)|^p mu({x}) for the unique n placing x in f^{-n}(W),
// the multipliers 1/w^(n) defining the isometry Pi, the factor-shift weights
// u_k, the distortion constant, and the chaos classification. nu is held as
// closed-form per-tail data anchored on a finite window, never enumerated.
class ConjugacyPackage {
  public:
    AtomicSystem system;
    OrbitDecomposition decomposition;
    bool nu_finite = false;
    std::optional<Rational> nu_total_exact;  // set when finite and exactly computable
    double nu_total_log = 0.0;               // log nu(X); +inf when divergent
    DistortionResult distortion;
    ChaosClassification chaos;

    // per-orbit closed form: anchors over one period beyond each transient,
    // extended by the exact per-period factors
    struct OrbitNu {
        std::int64_t fwd_start = 0, bwd_start = 0;  // first/last closed-form coordinates
        std::vector<double> fwd_anchor_log, bwd_anchor_log;
        std::vector<Rational> fwd_anchor_q, bwd_anchor_q;
        PeriodFactor fwd_factor, bwd_factor;  // nu(k+P)/nu(k) beyond the anchors
        double fwd_step_log = 0.0, bwd_step_log = 0.0;
        std::optional<Rational> fwd_period_q, bwd_period_q;
    };
    std::vector<OrbitNu> per_orbit;

    /// exact n with x in f^{-n}(W): n = -position (W sits at coordinate 0)
    static std::int64_t wandering_index(const AtomId& x) { return -x.position; }

    LogScalar transport_log(const AtomId& x) const {
        return cocycle_log(system, x, wandering_index(x)).inverse();
    }
    Scalar transport_exact(const AtomId& x) const {
        return cocycle_exact(system, x, wandering_index(x)).inverse();
    }

    double nu_log(const AtomId& x) const {
        const auto& od = per_orbit[static_cast<std::size_t>(x.orbit)];
        const std::int64_t k = x.position;
        if (k >= od.fwd_start) {
            const std::int64_t off = k - od.fwd_start;
            const std::int64_t j = off / od.fwd_factor.period, r = off % od.fwd_factor.period;
            return od.fwd_anchor_log[static_cast<std::size_t>(r)] +
                   static_cast<double>(j) * od.fwd_step_log * od.fwd_factor.period;
        }
        if (k <= od.bwd_start) {
            const std::int64_t off = od.bwd_start - k;
            const std::int64_t j = off / od.bwd_factor.period, r = off % od.bwd_factor.period;
            return od.bwd_anchor_log[static_cast<std::size_t>(r)] +
                   static_cast<double>(j) * od.bwd_step_log * od.bwd_factor.period;
        }
        return nu_direct_log(x);
    }

    Rational nu_exact(const AtomId& x) const {
        const auto& od = per_orbit[static_cast<std::size_t>(x.orbit)];
        const std::int64_t k = x.position;
        auto period_q = [](const std::optional<Rational>& q) {
            if (!q)
                throw OpdynError(Errc::PreconditionFailed, "exact nu unavailable for this system");
            return *q;
        };
        if (k >= od.fwd_start) {
            const std::int64_t off = k - od.fwd_start;
            const std::int64_t j = off / od.fwd_factor.period, r = off % od.fwd_factor.period;
            return od.fwd_anchor_q[static_cast<std::size_t>(r)] *
                   rat_pow(period_q(od.fwd_period_q), j);
        }
        if (k <= od.bwd_start) {
            const std::int64_t off = od.bwd_start - k;
            const std::int64_t j = off / od.bwd_factor.period, r = off % od.bwd_factor.period;
            return od.bwd_anchor_q[static_cast<std::size_t>(r)] *
                   rat_pow(period_q(od.bwd_period_q), j);
        }
        return nu_direct_exact(x);
    }

    // direct per-atom evaluation, used for the anchors and the core window
    double nu_direct_log(const AtomId& x) const {
        const LogScalar w = cocycle_log(system, x, wandering_index(x));
        return system.p_double() * w.mod.lg + system.log_mass(x);
    }
    Rational nu_direct_exact(const AtomId& x) const {
        return abs_pow_exact(cocycle_exact(system, x, wandering_index(x)), system.p_int()) *
               system.atom(x).mass;
    }

    /// nu(f^k(W)) summed over orbits, in log domain.
    LogReal nu_fk_W_log(std::int64_t k) const {
        LogReal sum = LogReal::zero();
        for (std::int32_t i : decomposition.dissipative_orbits)
            sum += LogReal::from_log(nu_log({i, k}));
        return sum;
    }
    Rational nu_fk_W_exact(std::int64_t k) const {
        Rational sum = 0;
        for (std::int32_t i : decomposition.dissipative_orbits) sum += nu_exact({i, k});
        return sum;
    }

    /// u_k = (nu(f^{k-1}W) / nu(f^kW))^{1/p}, from the closed-form measure.
    double u_from_nu(std::int64_t k) const {
        const double lg = nu_fk_W_log(k - 1).lg - nu_fk_W_log(k).lg;
        return std::exp(lg / system.p_double());
    }

    /// Same u_k from its defining measure ratio mu_{-k+1}(f^{k-1}W)/mu_{-k}(f^kW),
    /// evaluated by direct cocycle products.
    double u_direct(std::int64_t k) const {
        std::vector<AtomId> up, dn;
        for (std::int32_t i : decomposition.dissipative_orbits) {
            up.push_back({i, k - 1});
            dn.push_back({i, k});
        }
        const double lg = mu_n_log(system, up, -(k - 1)).lg - mu_n_log(system, dn, -k).lg;
        return std::exp(lg / system.p_double());
    }
};

namespace detail_dis {

inline void require_dissipative_invertible(const AtomicSystem& sys,
                                           const OrbitDecomposition& d) {
    require_invertible(sys, "dissipative conjugation");
    if (!d.conservative_orbits.empty())
        throw OpdynError(Errc::NotDissipative,
                         "conservative part has positive mass (cycles present)");
    if (d.dissipative_orbits.empty())
        throw OpdynError(Errc::NotDissipative, "no dissipative orbits");
}

}  // namespace detail_dis

inline DistortionResult check_bounded_distortion(const AtomicSystem& sys,
                                                 const OrbitDecomposition& decomp);

inline ChaosClassification classify_chaos_impl(const ConjugacyPackage& pkg);

inline ConjugacyPackage build_conjugacy(const AtomicSystem& sys,
                                        const OrbitDecomposition& decomp) {
    detail_dis::require_dissipative_invertible(sys, decomp);
    if (decomp.wandering_mass <= 0)
        throw OpdynError(Errc::InfiniteWanderingMass, "wandering set must have positive mass");

    ConjugacyPackage pkg;
    pkg.system = sys;
    pkg.decomposition = decomp;
    const bool exact_ok = sys.exact_capable();

    pkg.nu_finite = true;
    Rational total_q = 0;
    LogReal total_log = LogReal::zero();
    bool total_exact_ok = exact_ok;

    for (std::int32_t i : decomp.dissipative_orbits) {
        const Orbit& o = sys.orbit(i);
        ConjugacyPackage::OrbitNu od;
        const OrbitGrowth g = orbit_growth(sys, i, /*with_mass=*/true);
        // nu grows forward with the inverse-forward factor and backward with
        // the backward factor of the criterion growth
        od.fwd_factor = *g.minus;
        od.bwd_factor = *g.plus;
        od.fwd_start = o.forward_periodic_start();
        od.bwd_start = o.backward_periodic_start();
        od.fwd_step_log = od.fwd_factor.rate(sys.p_double());
        od.bwd_step_log = od.bwd_factor.rate(sys.p_double());
        if (exact_ok) {
            const long long pi = sys.p_int();
            Scalar fwd_block = Scalar::one(), bwd_block = Scalar::one();
            for (const auto& w : o.forward->periodic_weights) fwd_block = fwd_block * w;
            for (const auto& w : o.backward->periodic_weights) bwd_block = bwd_block * w;
            od.fwd_period_q = o.forward->mass_ratio / abs_pow_exact(fwd_block, pi);
            od.bwd_period_q = o.backward->mass_ratio * abs_pow_exact(bwd_block, pi);
        }
        for (std::int64_t r = 0; r < od.fwd_factor.period; ++r) {
            const AtomId x{i, od.fwd_start + r};
            od.fwd_anchor_log.push_back(pkg.nu_direct_log(x));
            if (exact_ok) od.fwd_anchor_q.push_back(pkg.nu_direct_exact(x));
        }
        for (std::int64_t r = 0; r < od.bwd_factor.period; ++r) {
            const AtomId x{i, od.bwd_start - r};
            od.bwd_anchor_log.push_back(pkg.nu_direct_log(x));
            if (exact_ok) od.bwd_anchor_q.push_back(pkg.nu_direct_exact(x));
        }
        // anchors must be computed against the original system before the
        // orbit data is registered
        pkg.per_orbit.resize(std::max<std::size_t>(pkg.per_orbit.size(),
                                                   static_cast<std::size_t>(i) + 1));
        pkg.per_orbit[static_cast<std::size_t>(i)] = od;

        const int s_f = od.fwd_factor.rate_sign(sys.p);
        const int s_b = od.bwd_factor.rate_sign(sys.p);
        if (s_f >= 0 || s_b >= 0) {
            pkg.nu_finite = false;
            continue;
        }
        // orbit total: core window plus two geometric tails
        LogReal orbit_log = LogReal::zero();
        Rational orbit_q = 0;
        for (std::int64_t q = od.bwd_start + 1; q <= od.fwd_start - 1; ++q) {
            orbit_log += LogReal::from_log(pkg.nu_direct_log({i, q}));
            if (exact_ok) orbit_q += pkg.nu_direct_exact({i, q});
        }
        LogReal fwd_block_sum = LogReal::zero(), bwd_block_sum = LogReal::zero();
        Rational fwd_block_q = 0, bwd_block_q = 0;
        for (std::size_t r = 0; r < od.fwd_anchor_log.size(); ++r) {
            fwd_block_sum += LogReal::from_log(od.fwd_anchor_log[r]);
            if (exact_ok) fwd_block_q += od.fwd_anchor_q[r];
        }
        for (std::size_t r = 0; r < od.bwd_anchor_log.size(); ++r) {
            bwd_block_sum += LogReal::from_log(od.bwd_anchor_log[r]);
            if (exact_ok) bwd_block_q += od.bwd_anchor_q[r];
        }
        const double fwd_fac = std::exp(od.fwd_step_log * od.fwd_factor.period);
        const double bwd_fac = std::exp(od.bwd_step_log * od.bwd_factor.period);
        orbit_log += LogReal::from_log(fwd_block_sum.lg - std::log1p(-fwd_fac));
        orbit_log += LogReal::from_log(bwd_block_sum.lg - std::log1p(-bwd_fac));
        total_log += orbit_log;
        if (exact_ok) {
            total_q += orbit_q + fwd_block_q / (1 - *od.fwd_period_q) +
                       bwd_block_q / (1 - *od.bwd_period_q);
        } else {
            total_exact_ok = false;
        }
    }

    if (pkg.nu_finite) {
        pkg.nu_total_log = total_log.lg;
        if (total_exact_ok) pkg.nu_total_exact = total_q;
    } else {
        pkg.nu_total_log = std::numeric_limits<double>::infinity();
    }

    pkg.distortion = check_bounded_distortion(sys, decomp);
    pkg.chaos = classify_chaos_impl(pkg);
    return pkg;
}

enum class PiDirection { Forward, Inverse };

/// Pi(phi) = phi / w^(n) on f^{-n}(W): pointwise multiplication by the
/// transport multiplier (forward) or by its reciprocal (inverse).
template <class Arith>
TypedSample<Arith> apply_pi(const ConjugacyPackage& pkg, const TypedSample<Arith>& phi,
                            PiDirection dir) {
    TypedSample<Arith> out;
    for (const auto& [a, v] : phi.support) {
        typename Arith::Value t;
        if constexpr (std::is_same_v<Arith, ExactArith>) t = pkg.transport_exact(a);
        else t = pkg.transport_log(a);
        out.support.emplace(a, dir == PiDirection::Forward ? Arith::mul(v, t)
                                                           : Arith::div(v, t));
    }
    return out;
}

/// The unweighted composition C_f psi = psi o f on the target space.
template <class Arith>
TypedSample<Arith> apply_composition(const AtomicSystem& sys, const TypedSample<Arith>& psi) {
    TypedSample<Arith> out;
    for (const auto& [a, v] : psi.support) out.support.emplace(sys.apply_map(a, -1), v);
    return out;
}

/// ||psi||^p in L^p(nu), log domain.
template <class Arith>
LogReal nu_norm_pow_log(const ConjugacyPackage& pkg, const TypedSample<Arith>& psi) {
    const double pd = pkg.system.p_double();
    LogReal sum = LogReal::zero();
    for (const auto& [a, v] : psi.support) {
        LogScalar lv;
        if constexpr (std::is_same_v<typename Arith::Value, Scalar>) lv = v.to_log();
        else lv = v;
        if (lv.is_zero()) continue;
        sum += LogReal::from_log(pd * lv.mod.lg + pkg.nu_log(a));
    }
    return sum;
}

inline Rational nu_norm_pow_exact(const ConjugacyPackage& pkg,
                                  const TypedSample<ExactArith>& psi) {
    const long long pi = pkg.system.p_int();
    Rational sum = 0;
    for (const auto& [a, v] : psi.support) sum += abs_pow_exact(v, pi) * pkg.nu_exact(a);
    return sum;
}

// ---- conjugacy verification -----------------------------------------------------

namespace detail_dis {

inline double scalar_gap(const LogScalar& a, const LogScalar& b) {
    if (a.is_zero() && b.is_zero()) return 0.0;
    if (a.is_zero() || b.is_zero()) return 1.0;
    const double mod_gap = relative_gap(a.mod, b.mod);
    double arg_gap = std::remainder(a.arg - b.arg, 2.0 * std::acos(-1.0));
    return std::max(mod_gap, std::abs(arg_gap));
}

template <class Arith>
double sample_gap(const TypedSample<Arith>& a, const TypedSample<Arith>& b, AtomId* worst) {
    double gap = 0.0;
    auto note = [&](const AtomId& at, double g) {
        if (g > gap) {
            gap = g;
            if (worst) *worst = at;
        }
    };
    for (const auto& [at, v] : a.support) {
        auto it = b.support.find(at);
        if constexpr (std::is_same_v<Arith, ExactArith>) {
            if (it == b.support.end()) note(at, v.is_zero() ? 0.0 : 1.0);
            else note(at, v == it->second ? 0.0 : 1.0);
        } else {
            if (it == b.support.end()) note(at, v.is_zero() ? 0.0 : 1.0);
            else note(at, scalar_gap(v, it->second));
        }
    }
    for (const auto& [at, v] : b.support)
        if (!a.support.count(at)) note(at, v.is_zero() ? 0.0 : 1.0);
    return gap;
}

}  // namespace detail_dis

/// Seeded verification of the conjugation: isometry of Pi, the intertwining
/// relation Pi o C_{w,f} = C_f o Pi, and exact inversion of Pi. Throws
/// VerificationFailed (with the counterexample atom) on any breach.
inline VerificationReport verify_conjugacy(const ConjugacyPackage& pkg,
                                           const AtomicSystem& sys, int samples,
                                           std::uint64_t seed) {
    VerificationReport rep;
    rep.samples = samples;
    rep.exact_mode = sys.exact && sys.exact_capable();
    SampleRng rng(seed);
    const double tol_iso = 1e-10, tol_twine = 1e-12;

    for (int s = 0; s < samples; ++s) {
        const SampleFunction phi = random_sample(sys, rng);
        if (rep.exact_mode) {
            const auto typed = to_typed<ExactArith>(phi);
            const auto pi_phi = apply_pi(pkg, typed, PiDirection::Forward);
            const Rational lhs = nu_norm_pow_exact(pkg, pi_phi);
            const Rational rhs = p_norm_pow_exact(sys, typed);
            if (lhs != rhs)
                throw OpdynError(Errc::VerificationFailed,
                                 "exact isometry breach on sample " + std::to_string(s));
            const auto a = apply_pi(pkg, apply_operator(sys, typed, 1), PiDirection::Forward);
            const auto b = apply_composition(sys, pi_phi);
            AtomId worst;
            if (detail_dis::sample_gap(a, b, &worst) != 0.0)
                throw OpdynError(Errc::VerificationFailed,
                                 "exact intertwining breach at " + atom_str(worst));
            const auto back = apply_pi(pkg, pi_phi, PiDirection::Inverse);
            if (detail_dis::sample_gap(back, typed, &worst) != 0.0)
                throw OpdynError(Errc::VerificationFailed,
                                 "exact inversion breach at " + atom_str(worst));
        } else {
            const auto typed = to_typed<LogArith>(phi);
            const auto pi_phi = apply_pi(pkg, typed, PiDirection::Forward);
            const double iso =
                relative_gap(nu_norm_pow_log(pkg, pi_phi), p_norm_pow_log(sys, typed));
            rep.max_isometry_dev = std::max(rep.max_isometry_dev, iso);
            if (iso > tol_iso)
                throw OpdynError(Errc::VerificationFailed,
                                 "isometry deviation " + std::to_string(iso) + " on sample " +
                                     std::to_string(s));
            const auto a = apply_pi(pkg, apply_operator(sys, typed, 1), PiDirection::Forward);
            const auto b = apply_composition(sys, pi_phi);
            AtomId worst;
            const double tw = detail_dis::sample_gap(a, b, &worst);
            rep.max_intertwine_dev = std::max(rep.max_intertwine_dev, tw);
            if (tw > tol_twine)
                throw OpdynError(Errc::VerificationFailed,
                                 "intertwining deviation " + std::to_string(tw) + " at " +
                                     atom_str(worst));
            const auto back = apply_pi(pkg, pi_phi, PiDirection::Inverse);
            const double rt = detail_dis::sample_gap(back, typed, &worst);
            rep.max_roundtrip_dev = std::max(rep.max_roundtrip_dev, rt);
            if (rt > tol_twine)
                throw OpdynError(Errc::VerificationFailed,
                                 "inversion deviation " + std::to_string(rt) + " at " +
                                     atom_str(worst));
        }
    }
    return rep;
}

// ---- bounded distortion ----------------------------------------------------------

// The two-sided distortion bound over B subset W reduces to singleton extremes:
// the ratio for B is a mass-weighted mean of the per-orbit ratios, so K is the
// supremum over k of the worst spread between a single orbit's transported mass
// and the W-average. Beyond the windows those spreads are exactly periodic (the
// per-period rates match), so a finite scan decides the supremum. Rates that
// differ between two orbits in either direction make the spread diverge.
inline DistortionResult check_bounded_distortion(const AtomicSystem& sys,
                                                 const OrbitDecomposition& decomp) {
    detail_dis::require_dissipative_invertible(sys, decomp);
    DistortionResult res;
    const auto& orbits = decomp.dissipative_orbits;
    if (orbits.size() == 1) {
        res.bounded = true;
        res.K = 1.0;
        if (sys.exact_capable()) res.K_exact = Rational(1);
        return res;
    }

    // exact per-period comparators: rate_a == rate_b  <=>  r_a^{P_b} == r_b^{P_a}
    const long long a = numerator(sys.p).convert_to<long long>();
    const long long b = denominator(sys.p).convert_to<long long>();
    auto comparator = [&](const PeriodFactor& f) {
        Rational r = rat_pow(f.mass_factor, 2 * b);
        if (f.weight_exp != 0) r *= rat_pow(f.weight_abs2, a * f.weight_exp);
        return r;
    };

    std::vector<PeriodFactor> fwd, bwd;
    for (std::int32_t i : orbits) {
        const OrbitGrowth g = orbit_growth(sys, i, true);
        fwd.push_back(*g.minus);  // nu factor along k -> +inf
        bwd.push_back(*g.plus);   // nu factor along k -> -inf
    }
    for (std::size_t j = 1; j < orbits.size(); ++j) {
        const bool fwd_eq = rat_pow(comparator(fwd[0]), fwd[j].period) ==
                            rat_pow(comparator(fwd[j]), fwd[0].period);
        const bool bwd_eq = rat_pow(comparator(bwd[0]), bwd[j].period) ==
                            rat_pow(comparator(bwd[j]), bwd[0].period);
        if (fwd_eq && bwd_eq) continue;
        res.bounded = false;
        // demonstrate the diverging spread at two depths
        const int dir = fwd_eq ? -1 : +1;
        for (std::int64_t k : {std::int64_t(32), std::int64_t(64)}) {
            const std::int64_t kk = dir * k;
            const double la = mu_n_log(sys, {{orbits[0], kk}}, -kk).lg;
            const double lb = mu_n_log(sys, {{orbits[j], kk}}, -kk).lg;
            const double l0a = mu_n_log(sys, {{orbits[0], 0}}, 0).lg;
            const double l0b = mu_n_log(sys, {{orbits[j], 0}}, 0).lg;
            res.witnesses.push_back(
                {kk, orbits[0], orbits[j], std::abs((la - l0a) - (lb - l0b)) / std::log(10.0)});
        }
        return res;
    }

    // equal rates: the spread is exactly periodic beyond the windows; scan the
    // core plus one common period on each side
    std::int64_t L = 1, reach = 0;
    for (std::size_t j = 0; j < orbits.size(); ++j) {
        L = std::lcm(L, fwd[j].period);
        L = std::lcm(L, bwd[j].period);
        const Orbit& o = sys.orbit(orbits[j]);
        reach = std::max({reach, std::abs(o.forward_periodic_start()),
                          std::abs(o.backward_periodic_start())});
    }
    const std::int64_t R = reach + 2 * L;

    const bool exact_ok = sys.exact_capable();
    const double pd = sys.p_double();
    auto nu_point_log = [&](const AtomId& x) {
        return pd * cocycle_log(sys, x, -x.position).mod.lg + sys.log_mass(x);
    };
    auto nu_point_exact = [&](const AtomId& x) {
        return abs_pow_exact(cocycle_exact(sys, x, -x.position), sys.p_int()) *
               sys.atom(x).mass;
    };

    double best_log = 0.0;
    Rational best_q(1);
    for (std::int64_t k = -R; k <= R; ++k) {
        LogReal mean_num = LogReal::zero();
        LogReal mean_den = LogReal::zero();
        std::vector<double> g_logs;
        std::vector<Rational> g_qs;
        Rational mean_num_q = 0, mean_den_q = 0;
        for (std::int32_t i : orbits) {
            const double g_log = nu_point_log({i, k}) - nu_point_log({i, 0});
            g_logs.push_back(g_log);
            const double m0 = nu_point_log({i, 0});
            mean_num += LogReal::from_log(g_log + m0);
            mean_den += LogReal::from_log(m0);
            if (exact_ok) {
                const Rational gq = nu_point_exact({i, k}) / nu_point_exact({i, 0});
                g_qs.push_back(gq);
                mean_num_q += nu_point_exact({i, k});
                mean_den_q += nu_point_exact({i, 0});
            }
        }
        const double mean_log = mean_num.lg - mean_den.lg;
        for (std::size_t j = 0; j < g_logs.size(); ++j) {
            const double spread = std::abs(g_logs[j] - mean_log);
            if (spread > best_log) best_log = spread;
            if (exact_ok) {
                const Rational spread_q = g_qs[j] * mean_den_q / mean_num_q;
                const Rational s = spread_q >= 1 ? spread_q : Rational(1) / spread_q;
                if (s > best_q) best_q = s;
            }
        }
    }
    res.bounded = true;
    res.K = std::exp(best_log);
    if (exact_ok) res.K_exact = best_q;
    return res;
}

/// The unweighted system (X, nu, f, 1) of the transported measure, for the
/// distortion-equivalence cross-check. Requires exact-capable data: the
/// derived masses are the exact nu values.
inline AtomicSystem derived_unweighted_system(const ConjugacyPackage& pkg) {
    const AtomicSystem& sys = pkg.system;
    if (!sys.exact_capable())
        throw OpdynError(Errc::PreconditionFailed,
                         "derived nu-system needs exact-capable data");
    AtomicSystem out;
    out.p = sys.p;
    out.exact = sys.exact;
    out.name = sys.name + "-nu";
    for (std::int32_t i : pkg.decomposition.dissipative_orbits) {
        const auto& od = pkg.per_orbit[static_cast<std::size_t>(i)];
        Orbit o;
        o.kind = MapKind::BilateralChain;
        // the explicit window must span coordinate 0; the closed form supplies
        // exact values wherever the widened window reaches into a tail
        const std::int64_t lo = std::min<std::int64_t>(od.bwd_start + 1, 0);
        const std::int64_t hi = std::max<std::int64_t>(od.fwd_start - 1, 0);
        for (std::int64_t q = lo; q <= hi; ++q)
            o.overrides[q] = {Scalar::one(), pkg.nu_exact({i, q})};
        TailSpec fwd;
        fwd.period = od.fwd_factor.period;
        fwd.mass_ratio = *od.fwd_period_q;
        for (std::int64_t r = 0; r < fwd.period; ++r) {
            fwd.periodic_weights.push_back(Scalar::one());
            fwd.transient.push_back({Scalar::one(), pkg.nu_exact({i, hi + 1 + r})});
        }
        TailSpec bwd;
        bwd.period = od.bwd_factor.period;
        bwd.mass_ratio = *od.bwd_period_q;
        for (std::int64_t r = 0; r < bwd.period; ++r) {
            bwd.periodic_weights.push_back(Scalar::one());
            bwd.transient.push_back({Scalar::one(), pkg.nu_exact({i, lo - 1 - r})});
        }
        o.forward = std::move(fwd);
        o.backward = std::move(bwd);
        out.orbits.push_back(std::move(o));
    }
    check_well_formed(out);
    return out;
}

// ---- factor shift ---------------------------------------------------------------

struct ShiftFactor {
    std::vector<std::int64_t> ks;
    std::vector<double> u;             // u_k over the window, from the nu ratios
    std::vector<double> u_direct;      // the same from direct measure products
    double fwd_tail_factor = 1.0;      // limiting per-step factor of u_k as k -> +inf
    double bwd_tail_factor = 1.0;      // as k -> -inf
};

inline ShiftFactor shift_factor(const ConjugacyPackage& pkg, std::int64_t k_radius) {
    if (!pkg.distortion.bounded)
        throw OpdynError(Errc::DistortionUnbounded,
                         "factor shift requires bounded distortion");
    ShiftFactor sf;
    for (std::int64_t k = -k_radius; k <= k_radius; ++k) {
        sf.ks.push_back(k);
        sf.u.push_back(pkg.u_from_nu(k));
        sf.u_direct.push_back(pkg.u_direct(k));
    }
    const auto& od = pkg.per_orbit[static_cast<std::size_t>(
        pkg.decomposition.dissipative_orbits.front())];
    sf.fwd_tail_factor = std::exp(-od.fwd_step_log / pkg.system.p_double());
    sf.bwd_tail_factor = std::exp(od.bwd_step_log / pkg.system.p_double());
    return sf;
}

/// Gamma(phi)(k) = nu(f^k W)^{1/p} / nu(W) * integral over W of phi o f^k.
/// Values are returned in polar log form; the bounded summation runs in
/// complex doubles, the unbounded prefactor stays in log domain.
inline std::map<std::int64_t, LogScalar> gamma_apply(const ConjugacyPackage& pkg,
                                                     const TypedSample<LogArith>& psi) {
    std::map<std::int64_t, std::complex<double>> sums;
    for (const auto& [at, v] : psi.support) {
        // phi(f^k(x_{o,0})) = phi(x_{o,k}): the atom at coordinate k contributes
        // at index k with weight mu({x_{o,0}})
        const double m0 = to_double(pkg.system.atom({at.orbit, 0}).mass);
        sums[at.position] += std::complex<double>(v.real_part(), v.imag_part()) * m0;
    }
    const double nu_W = pkg.nu_fk_W_log(0).lg;  // log nu(W) = log mu(W)
    std::map<std::int64_t, LogScalar> out;
    for (const auto& [k, z] : sums) {
        if (z == std::complex<double>(0.0, 0.0)) continue;
        const double pre = pkg.nu_fk_W_log(k).lg / pkg.system.p_double() - nu_W;
        out[k] = LogScalar{LogReal::from_log(pre + std::log(std::abs(z))), std::arg(z)};
    }
    return out;
}

/// B_u applied to a sequence: (B y)(k) = u_{k+1} y(k+1), the index convention
/// under which the stated Gamma intertwines the composition with the shift.
inline std::map<std::int64_t, LogScalar> shift_apply(const ConjugacyPackage& pkg,
                                                     const std::map<std::int64_t, LogScalar>& y) {
    std::map<std::int64_t, LogScalar> out;
    for (const auto& [k, v] : y) {
        const double u = pkg.u_from_nu(k);  // weight attached to target index k-1: u_{(k-1)+1}
        LogScalar w = v;
        w.mod = w.mod * LogReal::from_value(u);
        out[k - 1] = w;
    }
    return out;
}

inline double sequence_gap(const std::map<std::int64_t, LogScalar>& a,
                           const std::map<std::int64_t, LogScalar>& b) {
    double gap = 0.0;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        if (it == b.end()) gap = std::max(gap, v.is_zero() ? 0.0 : 1.0);
        else gap = std::max(gap, detail_dis::scalar_gap(v, it->second));
    }
    for (const auto& [k, v] : b)
        if (!a.count(k)) gap = std::max(gap, v.is_zero() ? 0.0 : 1.0);
    return gap;
}

struct ShiftFactorReport {
    int samples = 0;
    double max_gamma_dev = 0.0;       // Gamma o C_f vs B_u o Gamma
    double max_composite_dev = 0.0;   // (Gamma o Pi) o C_{w,f} vs B_u o (Gamma o Pi)
};

inline ShiftFactorReport verify_shift_factor(const ConjugacyPackage& pkg, int samples,
                                             std::uint64_t seed) {
    if (!pkg.distortion.bounded)
        throw OpdynError(Errc::DistortionUnbounded,
                         "factor verification requires bounded distortion");
    ShiftFactorReport rep;
    rep.samples = samples;
    SampleRng rng(seed);
    const double tol = 1e-10;
    for (int s = 0; s < samples; ++s) {
        const auto phi = to_typed<LogArith>(random_sample(pkg.system, rng));
        const auto psi = apply_pi(pkg, phi, PiDirection::Forward);
        const auto lhs1 = gamma_apply(pkg, apply_composition(pkg.system, psi));
        const auto rhs1 = shift_apply(pkg, gamma_apply(pkg, psi));
        rep.max_gamma_dev = std::max(rep.max_gamma_dev, sequence_gap(lhs1, rhs1));

        const auto lhs2 = gamma_apply(
            pkg, apply_pi(pkg, apply_operator(pkg.system, phi, 1), PiDirection::Forward));
        const auto rhs2 = shift_apply(pkg, gamma_apply(pkg, apply_pi(pkg, phi, PiDirection::Forward)));
        rep.max_composite_dev = std::max(rep.max_composite_dev, sequence_gap(lhs2, rhs2));

        if (rep.max_gamma_dev > tol || rep.max_composite_dev > tol)
            throw OpdynError(Errc::VerificationFailed,
                             "factor intertwining deviation exceeds tolerance on sample " +
                                 std::to_string(s));
    }
    return rep;
}

// ---- chaos classification --------------------------------------------------------

inline ChaosClassification classify_chaos_impl(const ConjugacyPackage& pkg) {
    ChaosClassification c;
    c.nu_finite = pkg.nu_finite;
    if (pkg.nu_finite) {
        c.devaney = Status::ProvenTrue;
        c.mixing = Status::ProvenTrue;
        c.frequently_hypercyclic = Status::ProvenTrue;
    } else {
        // nu(X) infinite on finitely many orbits means some orbit's own
        // nu-series diverges; every atom of that orbit has an infinite orbit
        // sum, and excising finitely many atoms cannot repair any B meeting it
        c.devaney = Status::ProvenFalse;
        c.mixing = Status::Unknown;
        c.frequently_hypercyclic =
            pkg.distortion.bounded ? Status::ProvenFalse : Status::Unknown;
    }
    c.frequently_recurrent = pkg.distortion.bounded ? c.devaney : Status::Unknown;
    c.equivalences_note =
        "hypercyclicity and recurrence are equivalent for this operator; under bounded "
        "distortion, Devaney chaos, frequent hypercyclicity and frequent recurrence share "
        "one status";
    return c;
}

/// Devaney criterion evaluated independently, atom by atom: chaotic iff every
/// atom's full orbit nu-sum converges (excision then removes any finite bad
/// set). Returns the per-orbit convergence flags for cross-checking.
inline std::vector<bool> devaney_orbit_sums_finite(const ConjugacyPackage& pkg) {
    std::vector<bool> flags;
    for (std::int32_t i : pkg.decomposition.dissipative_orbits) {
        const auto& od = pkg.per_orbit[static_cast<std::size_t>(i)];
        flags.push_back(od.fwd_factor.rate_sign(pkg.system.p) < 0 &&
                        od.bwd_factor.rate_sign(pkg.system.p) < 0);
    }
    return flags;
}

inline ChaosClassification classify_chaos(const ConjugacyPackage& pkg, const AtomicSystem&,
                                          std::int64_t) {
    return classify_chaos_impl(pkg);
}

}  // namespace opdyn
