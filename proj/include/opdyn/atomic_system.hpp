#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "opdyn/errors.hpp"
#include "opdyn/logdomain.hpp"
#include "opdyn/rational.hpp"
#include "opdyn/scalar.hpp"

namespace opdyn {

// Atoms are addressed by orbit and by an integer coordinate along the orbit;
// the self-map advances the coordinate by one. Cycle coordinates are reduced
// modulo the cycle length.
struct AtomId {
    std::int32_t orbit = 0;
    std::int64_t position = 0;
    auto operator<=>(const AtomId&) const = default;
};

inline std::string atom_str(const AtomId& a) {
    return "(" + std::to_string(a.orbit) + "," + std::to_string(a.position) + ")";
}

enum class MapKind { BilateralChain, Cycle, UnilateralChain };

inline const char* map_kind_name(MapKind k) {
    switch (k) {
        case MapKind::BilateralChain: return "bilateral";
        case MapKind::Cycle: return "cycle";
        case MapKind::UnilateralChain: return "unilateral";
    }
    return "?";
}

struct TailEntry {
    Scalar weight;
    Rational mass = 1;
};

// Finite presentation of one infinite tail of an orbit: finitely many explicit
// entries, then weights repeating with the given period while masses pick up
// the factor mass_ratio once per period. Base masses for the periodic block
// are the last `period` transient masses when available, otherwise the last
// transient mass, otherwise 1.
struct TailSpec {
    std::vector<TailEntry> transient;
    std::int64_t period = 1;
    std::vector<Scalar> periodic_weights;
    Rational mass_ratio = 1;

    TailEntry at(std::int64_t slot) const {  // slot >= 1
        const auto t = static_cast<std::int64_t>(transient.size());
        if (slot <= t) return transient[static_cast<std::size_t>(slot - 1)];
        const std::int64_t j = slot - t - 1;
        const std::int64_t k = j / period, r = j % period;
        Rational base(1);
        if (t >= period) {
            base = transient[static_cast<std::size_t>(t - period + r)].mass;
        } else if (t > 0) {
            base = transient.back().mass;
        }
        return {periodic_weights[static_cast<std::size_t>(r)], base * rat_pow(mass_ratio, k + 1)};
    }

    // log of the mass at a slot, avoiding the big rational power for deep slots
    double log_mass_at(std::int64_t slot) const {
        const auto t = static_cast<std::int64_t>(transient.size());
        if (slot <= t) return log_rational(transient[static_cast<std::size_t>(slot - 1)].mass);
        const std::int64_t j = slot - t - 1;
        const std::int64_t k = j / period, r = j % period;
        Rational base(1);
        if (t >= period) {
            base = transient[static_cast<std::size_t>(t - period + r)].mass;
        } else if (t > 0) {
            base = transient.back().mass;
        }
        return log_rational(base) + static_cast<double>(k + 1) * log_rational(mass_ratio);
    }
};

struct Orbit {
    MapKind kind = MapKind::BilateralChain;
    std::int64_t cycle_length = 0;  // Cycle only
    std::map<std::int64_t, TailEntry> overrides;
    std::optional<TailSpec> forward;
    std::optional<TailSpec> backward;

    // window of explicitly overridden coordinates; tails start just outside
    std::int64_t window_lo() const {
        if (overrides.empty()) return 0;
        return std::min<std::int64_t>(0, overrides.begin()->first);
    }
    std::int64_t window_hi() const {
        if (overrides.empty()) return -1;
        return std::max<std::int64_t>(0, overrides.rbegin()->first);
    }
    std::int64_t forward_transient_len() const {
        return forward ? static_cast<std::int64_t>(forward->transient.size()) : 0;
    }
    std::int64_t backward_transient_len() const {
        return backward ? static_cast<std::int64_t>(backward->transient.size()) : 0;
    }
    // first coordinate of the forward periodic block
    std::int64_t forward_periodic_start() const {
        return window_hi() + forward_transient_len() + 1;
    }
    // last coordinate of the backward periodic block
    std::int64_t backward_periodic_start() const {
        return window_lo() - backward_transient_len() - 1;
    }
};

using AtomData = TailEntry;  // per-atom weight and mass

struct SampleFunction {
    std::map<AtomId, Scalar> support;
};

struct BoundednessCertificate {
    double c = 0.0;
    std::optional<Rational> c_exact;
    AtomId c_witness;
    std::optional<double> c_tilde;
    std::optional<Rational> c_tilde_exact;
    AtomId c_tilde_witness;
};

class AtomicSystem {
  public:
    std::vector<Orbit> orbits;
    Rational p = 1;
    bool complex_field = false;
    bool exact = false;
    std::optional<bool> invertibility_claim;  // absent: derived from the data
    std::string name;

    // ---- structural queries -------------------------------------------------

    const Orbit& orbit(std::int32_t i) const {
        if (i < 0 || static_cast<std::size_t>(i) >= orbits.size())
            throw OpdynError(Errc::InvalidSystem, "orbit index out of range");
        return orbits[static_cast<std::size_t>(i)];
    }

    std::int64_t normalize_position(const Orbit& o, std::int64_t q) const {
        if (o.kind != MapKind::Cycle) return q;
        std::int64_t r = q % o.cycle_length;
        return r < 0 ? r + o.cycle_length : r;
    }

    bool in_domain(const AtomId& a) const {
        const Orbit& o = orbit(a.orbit);
        if (o.kind == MapKind::UnilateralChain) return a.position >= 0;
        return true;
    }

    AtomData atom(const AtomId& a) const {
        const Orbit& o = orbit(a.orbit);
        const std::int64_t q = normalize_position(o, a.position);
        if (o.kind == MapKind::UnilateralChain && q < 0)
            throw OpdynError(Errc::InvalidSystem, "unilateral coordinate below head");
        if (auto it = o.overrides.find(q); it != o.overrides.end()) return it->second;
        if (o.kind == MapKind::Cycle) return {Scalar::one(), Rational(1)};
        if (q > o.window_hi()) {
            if (!o.forward) throw OpdynError(Errc::InvalidSystem, "missing forward tail");
            return o.forward->at(q - o.window_hi());
        }
        if (q < o.window_lo()) {
            if (!o.backward) throw OpdynError(Errc::InvalidSystem, "missing backward tail");
            return o.backward->at(o.window_lo() - q);
        }
        throw OpdynError(Errc::InvalidSystem,
                         "window coordinate " + std::to_string(q) + " has no override");
    }

    double log_mass(const AtomId& a) const {
        const Orbit& o = orbit(a.orbit);
        const std::int64_t q = normalize_position(o, a.position);
        if (auto it = o.overrides.find(q); it != o.overrides.end())
            return log_rational(it->second.mass);
        if (o.kind == MapKind::Cycle) return 0.0;
        if (q > o.window_hi() && o.forward) return o.forward->log_mass_at(q - o.window_hi());
        if (q < o.window_lo() && o.backward) return o.backward->log_mass_at(o.window_lo() - q);
        return log_rational(atom(a).mass);
    }

    /// f^steps applied to an atom; steps may be negative for invertible kinds.
    AtomId apply_map(const AtomId& a, std::int64_t steps = 1) const {
        const Orbit& o = orbit(a.orbit);
        if (o.kind == MapKind::UnilateralChain && a.position + steps < 0)
            throw OpdynError(Errc::NonInvertibleMap, "backward iterate leaves a unilateral chain");
        return {a.orbit, normalize_position(o, a.position + steps)};
    }

    /// f^{-n}(a) as a set: the unique preimage atom, or nothing (unilateral chains).
    std::optional<AtomId> preimage(const AtomId& a, std::int64_t n) const {
        const Orbit& o = orbit(a.orbit);
        const std::int64_t q = a.position - n;
        if (o.kind == MapKind::UnilateralChain && q < 0) return std::nullopt;
        return AtomId{a.orbit, normalize_position(o, q)};
    }

    bool map_bijective() const {
        for (const auto& o : orbits)
            if (o.kind == MapKind::UnilateralChain) return false;
        return true;
    }

    bool has_zero_weight() const {
        for (std::size_t i = 0; i < orbits.size(); ++i) {
            const Orbit& o = orbits[i];
            for (const auto& [q, e] : o.overrides)
                if (e.weight.is_zero()) return true;
            for (const TailSpec* t : {o.forward ? &*o.forward : nullptr,
                                      o.backward ? &*o.backward : nullptr}) {
                if (!t) continue;
                for (const auto& e : t->transient)
                    if (e.weight.is_zero()) return true;
                for (const auto& w : t->periodic_weights)
                    if (w.is_zero()) return true;
            }
        }
        return false;
    }

    /// True when the operator itself is invertible: bijective map, no zero weight.
    bool invertible() const { return map_bijective() && !has_zero_weight(); }

    /// Exact arithmetic is available for real rational data with integer p.
    bool exact_capable() const {
        return !complex_field && denominator(p) == 1;
    }
    long long p_int() const {
        if (denominator(p) != 1)
            throw OpdynError(Errc::PreconditionFailed, "integer exponent required");
        return numerator(p).convert_to<long long>();
    }
    double p_double() const { return to_double(p); }

    // Representative coordinates whose single-step mass/weight ratios exhaust
    // every value the infinite orbit attains: window, transients, and two full
    // periods of each tail.
    std::vector<std::int64_t> representative_positions(const Orbit& o) const {
        std::vector<std::int64_t> qs;
        if (o.kind == MapKind::Cycle) {
            for (std::int64_t q = 0; q < o.cycle_length; ++q) qs.push_back(q);
            return qs;
        }
        const std::int64_t hi =
            o.window_hi() + o.forward_transient_len() + 2 * (o.forward ? o.forward->period : 1) + 1;
        std::int64_t lo = o.window_lo();
        if (o.kind == MapKind::BilateralChain)
            lo = o.window_lo() - o.backward_transient_len() -
                 2 * (o.backward ? o.backward->period : 1) - 1;
        for (std::int64_t q = lo; q <= hi; ++q) qs.push_back(q);
        return qs;
    }
};

// ---- structural validation --------------------------------------------------

inline void check_well_formed(const AtomicSystem& sys) {
    if (sys.orbits.empty()) throw OpdynError(Errc::InvalidSystem, "no orbits: mu(X) = 0");
    if (sys.p < 1) throw OpdynError(Errc::InvalidSystem, "exponent p must be >= 1");
    for (std::size_t i = 0; i < sys.orbits.size(); ++i) {
        const Orbit& o = sys.orbits[i];
        const std::string tag = "orbit " + std::to_string(i) + ": ";
        auto check_tail = [&](const TailSpec& t, const char* which) {
            if (t.period < 1 || t.periodic_weights.size() != static_cast<std::size_t>(t.period))
                throw OpdynError(Errc::SchemaError,
                                 tag + std::string(which) + " tail: period/weights mismatch");
            if (t.mass_ratio <= 0)
                throw OpdynError(Errc::InvalidSystem, tag + "mass_ratio must be positive");
            for (const auto& e : t.transient)
                if (e.mass <= 0)
                    throw OpdynError(Errc::InvalidSystem, tag + "transient mass must be positive");
        };
        switch (o.kind) {
            case MapKind::Cycle:
                if (o.cycle_length < 1)
                    throw OpdynError(Errc::SchemaError, tag + "cycle needs a positive length");
                if (o.forward || o.backward)
                    throw OpdynError(Errc::SchemaError, tag + "cycle carries a tail");
                for (const auto& [q, e] : o.overrides)
                    if (q < 0 || q >= o.cycle_length)
                        throw OpdynError(Errc::SchemaError, tag + "override outside the cycle");
                break;
            case MapKind::BilateralChain:
                if (!o.forward || !o.backward)
                    throw OpdynError(Errc::SchemaError, tag + "bilateral chain needs both tails");
                check_tail(*o.forward, "forward");
                check_tail(*o.backward, "backward");
                break;
            case MapKind::UnilateralChain:
                if (!o.forward)
                    throw OpdynError(Errc::SchemaError, tag + "unilateral chain needs a forward tail");
                if (o.backward)
                    throw OpdynError(Errc::SchemaError, tag + "unilateral chain has no backward tail");
                check_tail(*o.forward, "forward");
                for (const auto& [q, e] : o.overrides)
                    if (q < 0)
                        throw OpdynError(Errc::SchemaError, tag + "override below the chain head");
                break;
        }
        if (o.kind != MapKind::Cycle) {
            for (std::int64_t q = o.window_lo(); q <= o.window_hi(); ++q)
                if (!o.overrides.count(q))
                    throw OpdynError(Errc::SchemaError,
                                     tag + "window gap at coordinate " + std::to_string(q));
        }
        for (const auto& [q, e] : o.overrides)
            if (e.mass <= 0)
                throw OpdynError(Errc::InvalidSystem, tag + "atom mass must be positive");
    }
    if (sys.invertibility_claim.value_or(false)) {
        if (!sys.map_bijective())
            throw OpdynError(Errc::NonInvertibleMap,
                             "invertibility claimed on a unilateral chain");
        if (sys.has_zero_weight())
            throw OpdynError(Errc::ZeroWeight, "invertibility claimed with a zero weight");
    }
    if (sys.exact && !sys.exact_capable())
        throw OpdynError(Errc::PreconditionFailed,
                         "exact mode needs a real scalar field and integer p");
}

// Least c with  |w(x)|^p mu({x}) <= c mu({f(x)})  per atom, and the analogous
// least constant for the inverse weight when the operator is invertible. The
// per-atom inequalities extend to all measurable sets by countable additivity.
inline BoundednessCertificate validate(const AtomicSystem& sys) {
    check_well_formed(sys);
    const double pd = sys.p_double();
    const bool want_exact = sys.exact_capable();

    BoundednessCertificate cert;
    bool first = true;
    double best_hi = 0, best_lo = 0;
    Rational best_hi_q, best_lo_q;
    AtomId hi_at, lo_at;

    for (std::size_t i = 0; i < sys.orbits.size(); ++i) {
        const Orbit& o = sys.orbits[i];
        for (std::int64_t q : sys.representative_positions(o)) {
            const AtomId x{static_cast<std::int32_t>(i), q};
            const AtomData here = sys.atom(x);
            const AtomData next = sys.atom(sys.apply_map(x));
            if (!std::isfinite(to_double(rat_abs(here.weight.re))) ||
                !std::isfinite(to_double(rat_abs(here.weight.im))))
                throw OpdynError(Errc::UnboundedWeight, "non-finite weight at " + atom_str(x));
            const double lw = here.weight.is_zero()
                                  ? -std::numeric_limits<double>::infinity()
                                  : here.weight.to_log().mod.lg;
            const double ratio_log =
                pd * lw + log_rational(here.mass) - log_rational(next.mass);
            std::optional<Rational> ratio_q;
            if (want_exact)
                ratio_q = abs_pow_exact(here.weight, sys.p_int()) * here.mass / next.mass;
            if (first || ratio_log > best_hi) {
                best_hi = ratio_log;
                hi_at = x;
                if (ratio_q) best_hi_q = *ratio_q;
            }
            if (first || ratio_log < best_lo) {
                best_lo = ratio_log;
                lo_at = x;
                if (ratio_q) best_lo_q = *ratio_q;
            }
            first = false;
        }
    }

    cert.c = std::exp(best_hi);
    cert.c_witness = hi_at;
    if (want_exact) cert.c_exact = best_hi_q;
    if (sys.invertible()) {
        // sup over atoms of mu({x}) / (|w(f^{-1}x)|^p mu({f^{-1}x})) equals the
        // reciprocal of the smallest forward ratio
        cert.c_tilde = std::exp(-best_lo);
        cert.c_tilde_witness = sys.apply_map(lo_at);
        if (want_exact && best_lo_q != 0) cert.c_tilde_exact = Rational(1) / best_lo_q;
    }
    return cert;
}

inline void require_invertible(const AtomicSystem& sys, const char* who) {
    if (!sys.map_bijective())
        throw OpdynError(Errc::NonInvertibleMap, std::string(who) + " on a unilateral chain");
    if (!sys.invertible())
        throw OpdynError(Errc::ZeroWeight, std::string(who) + " with a zero weight");
}

// ---- cocycle ------------------------------------------------------------------

/// w^(n)(x): the n-step weight product along the orbit of x; n may be negative
/// for invertible systems. Always computed in log-modulus/argument form.
inline LogScalar cocycle_log(const AtomicSystem& sys, const AtomId& x, std::int64_t n) {
    LogScalar acc = LogScalar::one();
    if (n >= 0) {
        for (std::int64_t j = 0; j < n; ++j)
            acc *= sys.atom(sys.apply_map(x, j)).weight.to_log();
        return acc;
    }
    require_invertible(sys, "negative cocycle");
    for (std::int64_t j = 1; j <= -n; ++j)
        acc *= sys.atom(sys.apply_map(x, -j)).weight.to_log().inverse();
    return acc;
}

/// Exact-rational w^(n)(x); real scalar field only.
inline Scalar cocycle_exact(const AtomicSystem& sys, const AtomId& x, std::int64_t n) {
    if (sys.complex_field)
        throw OpdynError(Errc::PreconditionFailed, "exact cocycle on a complex field");
    Scalar acc = Scalar::one();
    if (n >= 0) {
        for (std::int64_t j = 0; j < n; ++j) acc = acc * sys.atom(sys.apply_map(x, j)).weight;
        return acc;
    }
    require_invertible(sys, "negative cocycle");
    for (std::int64_t j = 1; j <= -n; ++j)
        acc = acc * sys.atom(sys.apply_map(x, -j)).weight.inverse();
    return acc;
}

// ---- mu_n and operator application ---------------------------------------------

/// mu_n(B) = sum over x in B of |w^(n)(x)|^p mu({x}), in log-sum-exp arithmetic.
inline LogReal mu_n_log(const AtomicSystem& sys, const std::vector<AtomId>& atoms,
                        std::int64_t n) {
    const double pd = sys.p_double();
    LogReal sum = LogReal::zero();
    for (const AtomId& x : atoms) {
        const LogScalar w = cocycle_log(sys, x, n);
        if (w.is_zero()) continue;
        sum += LogReal::from_log(pd * w.mod.lg + sys.log_mass(x));
    }
    return sum;
}

/// Exact mu_n(B); requires integer p and a real scalar field.
inline Rational mu_n_exact(const AtomicSystem& sys, const std::vector<AtomId>& atoms,
                           std::int64_t n) {
    if (!sys.exact_capable())
        throw OpdynError(Errc::PreconditionFailed, "exact mu_n unavailable for this system");
    const long long pi = sys.p_int();
    Rational sum = 0;
    for (const AtomId& x : atoms)
        sum += abs_pow_exact(cocycle_exact(sys, x, n), pi) * sys.atom(x).mass;
    return sum;
}

/// f^{-n}(B) as an atom set; unilateral atoms without a preimage drop out.
inline std::vector<AtomId> preimage_set(const AtomicSystem& sys, const std::vector<AtomId>& atoms,
                                        std::int64_t n) {
    std::vector<AtomId> out;
    out.reserve(atoms.size());
    for (const AtomId& a : atoms)
        if (auto x = sys.preimage(a, n)) out.push_back(*x);
    return out;
}

// (C_{w,f})^n phi, with value w^(n)(x) phi(f^n(x)) on the transported support.
// Arith selects the arithmetic: exact rational or log-domain floating point.
struct ExactArith {
    using Value = Scalar;
    static Value convert(const Scalar& s) { return s; }
    static Value cocycle(const AtomicSystem& sys, const AtomId& x, std::int64_t n) {
        return cocycle_exact(sys, x, n);
    }
    static Value mul(const Value& a, const Value& b) { return a * b; }
    static Value div(const Value& a, const Value& b) { return a / b; }
    static bool equal(const Value& a, const Value& b) { return a == b; }
};

struct LogArith {
    using Value = LogScalar;
    static Value convert(const Scalar& s) { return s.to_log(); }
    static Value cocycle(const AtomicSystem& sys, const AtomId& x, std::int64_t n) {
        return cocycle_log(sys, x, n);
    }
    static Value mul(const Value& a, const Value& b) { return a * b; }
    static Value div(const Value& a, const Value& b) { return a * b.inverse(); }
};

template <class Arith>
struct TypedSample {
    std::map<AtomId, typename Arith::Value> support;
};

template <class Arith>
TypedSample<Arith> to_typed(const SampleFunction& phi) {
    TypedSample<Arith> out;
    for (const auto& [a, v] : phi.support)
        if (!v.is_zero()) out.support.emplace(a, Arith::convert(v));
    return out;
}

template <class Arith>
TypedSample<Arith> apply_operator(const AtomicSystem& sys, const TypedSample<Arith>& phi,
                                  std::int64_t n) {
    if (n < 0) require_invertible(sys, "negative operator power");
    TypedSample<Arith> out;
    for (const auto& [a, v] : phi.support) {
        const auto x = sys.preimage(a, n);
        if (!x) continue;
        auto w = Arith::cocycle(sys, *x, n);
        if (w.is_zero()) continue;
        out.support.emplace(*x, Arith::mul(w, v));
    }
    return out;
}

/// ||phi||_p^p in log domain.
template <class Arith>
LogReal p_norm_pow_log(const AtomicSystem& sys, const TypedSample<Arith>& phi) {
    const double pd = sys.p_double();
    LogReal sum = LogReal::zero();
    for (const auto& [a, v] : phi.support) {
        LogScalar lv;
        if constexpr (std::is_same_v<typename Arith::Value, Scalar>) lv = v.to_log();
        else lv = v;
        if (lv.is_zero()) continue;
        sum += LogReal::from_log(pd * lv.mod.lg + sys.log_mass(a));
    }
    return sum;
}

/// Exact ||phi||_p^p.
inline Rational p_norm_pow_exact(const AtomicSystem& sys, const TypedSample<ExactArith>& phi) {
    const long long pi = sys.p_int();
    Rational sum = 0;
    for (const auto& [a, v] : phi.support) sum += abs_pow_exact(v, pi) * sys.atom(a).mass;
    return sum;
}

// ---- seeded sampling --------------------------------------------------------------

// Deterministic across platforms: draws raw 64-bit words from mt19937_64 and
// reduces them directly, avoiding library distribution implementations.
class SampleRng {
  public:
    explicit SampleRng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t word() { return eng_(); }
    std::int64_t uniform(std::int64_t lo, std::int64_t hi) {  // inclusive
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<std::int64_t>(word() % span);
    }

  private:
    std::mt19937_64 eng_;
};

/// Finitely supported test function with small rational values on random atoms.
inline SampleFunction random_sample(const AtomicSystem& sys, SampleRng& rng,
                                    std::int64_t radius = 24) {
    SampleFunction phi;
    const auto orbit_count = static_cast<std::int64_t>(sys.orbits.size());
    const std::int64_t terms = rng.uniform(1, 8);
    for (std::int64_t t = 0; t < terms; ++t) {
        const auto orbit = static_cast<std::int32_t>(rng.uniform(0, orbit_count - 1));
        std::int64_t lo = -radius;
        if (sys.orbit(orbit).kind != MapKind::BilateralChain) lo = 0;
        const AtomId a{orbit, rng.uniform(lo, radius)};
        Rational num(rng.uniform(1, 9) * (rng.uniform(0, 1) ? 1 : -1));
        Rational den(rng.uniform(1, 9));
        phi.support[a] = Scalar(num / den);
    }
    return phi;
}

}  // namespace opdyn
