#pragma once

#include <cstdio>
#include <string>

#include "opdyn/cfs_expansivity.hpp"
#include "opdyn/dissipative.hpp"
#include "opdyn/io.hpp"
#include "opdyn/lp_expansivity.hpp"
#include "opdyn/orbit_hopf.hpp"
#include "opdyn/verdict.hpp"

namespace opdyn {

inline Json finite_or_str(double v) {
    if (std::isfinite(v)) return Json(v);
    if (std::isnan(v)) return Json("nan");
    return Json(v > 0 ? "inf" : "-inf");
}

inline std::string fmt_g(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline Json atom_json(const AtomId& a) {
    return Json{{"orbit", a.orbit}, {"position", a.position}};
}

inline Json certificate_json(const BoundednessCertificate& cert) {
    Json j;
    j["c"] = finite_or_str(cert.c);
    if (cert.c_exact) j["c_exact"] = rational_json(*cert.c_exact);
    j["c_witness"] = atom_json(cert.c_witness);
    if (cert.c_tilde) {
        j["c_tilde"] = finite_or_str(*cert.c_tilde);
        if (cert.c_tilde_exact) j["c_tilde_exact"] = rational_json(*cert.c_tilde_exact);
        j["c_tilde_witness"] = atom_json(cert.c_tilde_witness);
    }
    return j;
}

inline Json decomposition_json(const OrbitDecomposition& d) {
    Json j;
    j["conservative_orbits"] = d.conservative_orbits;
    j["dissipative_orbits"] = d.dissipative_orbits;
    Json w = Json::array();
    for (const auto& a : d.wandering_set) w.push_back(atom_json(a));
    j["wandering_set"] = w;
    j["wandering_mass"] = rational_json(d.wandering_mass);
    return j;
}

inline Json verdict_json(const Verdict& v) {
    Json j;
    j["status"] = status_name(v.status);
    j["horizon"] = v.horizon;
    if (v.witness) {
        j["witness"] = {{"atom", atom_json(v.witness->atom)},
                        {"n", v.witness->n},
                        {"log10_value", finite_or_str(v.witness->log10_value)}};
    }
    Json rows = Json::array();
    for (const auto& r : v.rate_data) {
        Json row;
        row["atom"] = atom_json(r.atom);
        row["lambda_plus"] = r.lambda_plus ? finite_or_str(*r.lambda_plus) : Json(nullptr);
        row["lambda_minus"] = r.lambda_minus ? finite_or_str(*r.lambda_minus) : Json(nullptr);
        row["transient_max_log10"] = finite_or_str(r.transient_max_log10);
        if (r.assignment != ' ') row["class"] = std::string(1, r.assignment);
        rows.push_back(row);
    }
    j["rate_data"] = rows;
    j["detail"] = v.detail;
    return j;
}

inline std::string rate_table_csv(const Verdict& v) {
    std::string out = "orbit,position,lambda_plus,lambda_minus,transient_max_log10,class\n";
    for (const auto& r : v.rate_data) {
        out += std::to_string(r.atom.orbit) + "," + std::to_string(r.atom.position) + ",";
        out += (r.lambda_plus ? fmt_g(*r.lambda_plus) : "") + std::string(",");
        out += (r.lambda_minus ? fmt_g(*r.lambda_minus) : "") + std::string(",");
        out += fmt_g(r.transient_max_log10) + std::string(",");
        out += (r.assignment == ' ' ? "" : std::string(1, r.assignment)) + "\n";
    }
    return out;
}

/// Criterion trace for plotting: one row per n in [-horizon, horizon] with the
/// log10 of the criterion value and a sign column (0 marks an exact zero).
inline std::string plot_csv_lp(const AtomicSystem& sys, const AtomId& atom,
                               std::int64_t horizon) {
    std::string out = "n,log10_value,sign\n";
    const bool neg_ok = sys.invertible();
    for (std::int64_t n = -horizon; n <= horizon; ++n) {
        if (n < 0 && !neg_ok) continue;
        const LogReal v = lp_criterion_log(sys, atom, n);
        out += std::to_string(n) + "," + (v.is_zero() ? "-inf" : fmt_g(v.log10_value())) + "," +
               (v.is_zero() ? "0" : "1") + "\n";
    }
    return out;
}

inline std::string plot_csv_cfs(const AtomicSystem& sys, const AtomId& atom,
                                std::int64_t horizon) {
    std::string out = "n,log10_value,sign\n";
    const bool neg_ok = sys.invertible();
    const TestPair pair{atom, std::nullopt};
    for (std::int64_t n = -horizon; n <= horizon; ++n) {
        if (n < 0 && !neg_ok) continue;
        const LogReal v = criterion_value_log(sys, pair, n);
        out += std::to_string(n) + "," + (v.is_zero() ? "-inf" : fmt_g(v.log10_value())) + "," +
               (v.is_zero() ? "0" : "1") + "\n";
    }
    return out;
}

inline Json chaos_json(const ChaosClassification& c) {
    Json j;
    j["nu_finite"] = c.nu_finite;
    j["devaney"] = status_name(c.devaney);
    j["mixing"] = status_name(c.mixing);
    j["frequently_hypercyclic"] = status_name(c.frequently_hypercyclic);
    j["frequently_recurrent"] = status_name(c.frequently_recurrent);
    j["equivalences_note"] = c.equivalences_note;
    return j;
}

inline Json distortion_json(const DistortionResult& d) {
    Json j;
    if (d.bounded) {
        j["K"] = finite_or_str(d.K);
        if (d.K_exact) j["K_exact"] = rational_json(*d.K_exact);
    } else {
        j["K"] = "unbounded";
        Json w = Json::array();
        for (const auto& x : d.witnesses)
            w.push_back({{"k", x.k},
                         {"orbit_a", x.orbit_a},
                         {"orbit_b", x.orbit_b},
                         {"spread_log10", finite_or_str(x.ratio_log10)}});
        j["witnesses"] = w;
    }
    return j;
}

inline Json package_json(const ConjugacyPackage& pkg, std::int64_t window_radius) {
    Json j;
    j["system"] = system_json(pkg.system);
    j["wandering_set"] = decomposition_json(pkg.decomposition)["wandering_set"];
    j["nu_finite"] = pkg.nu_finite;
    j["nu_total"] = pkg.nu_finite ? finite_or_str(std::exp(pkg.nu_total_log)) : Json("inf");
    if (pkg.nu_total_exact) j["nu_total_exact"] = rational_json(*pkg.nu_total_exact);

    Json nu_rows = Json::array();
    const bool exact_ok = pkg.system.exact_capable();
    for (std::int32_t i : pkg.decomposition.dissipative_orbits) {
        for (std::int64_t k = -window_radius; k <= window_radius; ++k) {
            Json row;
            row["atom"] = atom_json({i, k});
            row["log10_nu"] = finite_or_str(pkg.nu_log({i, k}) / std::log(10.0));
            if (exact_ok) row["nu_exact"] = rational_json(pkg.nu_exact({i, k}));
            nu_rows.push_back(row);
        }
    }
    j["nu_window"] = nu_rows;

    Json u_rows = Json::array();
    for (std::int64_t k = -window_radius; k <= window_radius; ++k)
        u_rows.push_back({{"k", k}, {"u", finite_or_str(pkg.u_from_nu(k))}});
    j["u_window"] = u_rows;

    j["distortion"] = distortion_json(pkg.distortion);
    j["chaos"] = chaos_json(pkg.chaos);
    return j;
}

/// Rebuilds the conjugation from the system recorded inside an emitted
/// package and checks the stored tables against the fresh computation.
inline ConjugacyPackage package_from_json(const Json& j) {
    if (!j.contains("system"))
        throw OpdynError(Errc::SchemaError, "package is missing its system record");
    const AtomicSystem sys = parse_system_json(j["system"]);
    ConjugacyPackage pkg = build_conjugacy(sys, hopf_decompose(sys));
    const double tol = 1e-9;
    if (j.contains("u_window")) {
        for (const auto& row : j["u_window"]) {
            if (!row.contains("u") || !row["u"].is_number()) continue;
            const std::int64_t k = row.at("k").get<std::int64_t>();
            const double stored = row["u"].get<double>();
            const double fresh = pkg.u_from_nu(k);
            if (std::abs(stored - fresh) > tol * std::max(1.0, std::abs(fresh)))
                throw OpdynError(Errc::VerificationFailed,
                                 "stored u_" + std::to_string(k) +
                                     " disagrees with the rebuilt package");
        }
    }
    if (j.contains("nu_window")) {
        for (const auto& row : j["nu_window"]) {
            if (!row.contains("log10_nu") || !row["log10_nu"].is_number()) continue;
            const AtomId a{row.at("atom").at("orbit").get<std::int32_t>(),
                           row.at("atom").at("position").get<std::int64_t>()};
            const double stored = row["log10_nu"].get<double>();
            const double fresh = pkg.nu_log(a) / std::log(10.0);
            if (std::abs(stored - fresh) > tol * std::max(1.0, std::abs(fresh)))
                throw OpdynError(Errc::VerificationFailed,
                                 "stored nu at " + atom_str(a) +
                                     " disagrees with the rebuilt package");
        }
    }
    return pkg;
}

inline Json verification_json(const VerificationReport& r) {
    Json j;
    j["samples"] = r.samples;
    j["exact_mode"] = r.exact_mode;
    j["max_isometry_deviation"] = finite_or_str(r.max_isometry_dev);
    j["max_intertwine_deviation"] = finite_or_str(r.max_intertwine_dev);
    j["max_roundtrip_deviation"] = finite_or_str(r.max_roundtrip_dev);
    j["passed"] = true;
    return j;
}

}  // namespace opdyn
