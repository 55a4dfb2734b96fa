#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "opdyn/atomic_system.hpp"

namespace opdyn {

using Json = nlohmann::ordered_json;

// ---- exact literal handling ------------------------------------------------------

/// Exact rational value of a double (doubles are dyadic rationals).
inline Rational rational_from_double(double d) {
    if (!std::isfinite(d)) throw OpdynError(Errc::SchemaError, "non-finite number literal");
    if (d == 0.0) return Rational(0);
    int exp = 0;
    const double m = std::frexp(d, &exp);  // d = m * 2^exp, |m| in [0.5, 1)
    const auto scaled = static_cast<long long>(std::ldexp(m, 53));
    const int shift = 53 - exp;
    Rational r(scaled);
    if (shift > 0) r /= rat_pow(Rational(2), shift);
    else r *= rat_pow(Rational(2), -shift);
    return r;
}

inline Rational parse_rational_field(const Json& j, const std::string& field) {
    try {
        if (j.is_number_integer()) return Rational(j.get<long long>());
        if (j.is_number_float()) return rational_from_double(j.get<double>());
        if (j.is_string()) return parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
        throw OpdynError(Errc::SchemaError, field + ": " + e.what());
    }
    throw OpdynError(Errc::SchemaError,
                     field + ": expected a number or a \"p/q\" string");
}

inline Scalar parse_weight_field(const Json& j, const std::string& field) {
    if (j.is_array()) {
        if (j.size() != 2)
            throw OpdynError(Errc::SchemaError, field + ": complex literal needs [re, im]");
        return {parse_rational_field(j[0], field + "[0]"),
                parse_rational_field(j[1], field + "[1]")};
    }
    return Scalar(parse_rational_field(j, field));
}

inline Json rational_json(const Rational& q) {
    if (denominator(q) == 1 && rat_abs(q) <= Rational(1000000000))
        return Json(numerator(q).convert_to<long long>());
    return Json(rational_str(q));
}

inline Json weight_json(const Scalar& w) {
    if (w.is_real()) return rational_json(w.re);
    return Json::array({rational_json(w.re), rational_json(w.im)});
}

// ---- system schema ---------------------------------------------------------------

inline TailSpec parse_tail(const Json& j, const std::string& field) {
    TailSpec t;
    if (j.contains("transient")) {
        for (std::size_t i = 0; i < j["transient"].size(); ++i) {
            const auto& e = j["transient"][i];
            const std::string tag = field + ".transient[" + std::to_string(i) + "]";
            t.transient.push_back({parse_weight_field(e.at("weight"), tag + ".weight"),
                                   parse_rational_field(e.at("mass"), tag + ".mass")});
        }
    }
    if (!j.contains("periodic_weights"))
        throw OpdynError(Errc::SchemaError, field + ": missing periodic_weights");
    for (std::size_t i = 0; i < j["periodic_weights"].size(); ++i)
        t.periodic_weights.push_back(parse_weight_field(
            j["periodic_weights"][i], field + ".periodic_weights[" + std::to_string(i) + "]"));
    t.period = j.contains("period") ? j["period"].get<std::int64_t>()
                                    : static_cast<std::int64_t>(t.periodic_weights.size());
    if (j.contains("mass_ratio"))
        t.mass_ratio = parse_rational_field(j["mass_ratio"], field + ".mass_ratio");
    return t;
}

inline AtomicSystem parse_system_json(const Json& j) {
    AtomicSystem sys;
    if (!j.is_object()) throw OpdynError(Errc::SchemaError, "top level must be an object");
    if (!j.contains("orbits")) throw OpdynError(Errc::SchemaError, "missing field: orbits");
    if (j.contains("p")) sys.p = parse_rational_field(j["p"], "p");
    if (j.contains("scalar_field")) {
        const std::string f = j["scalar_field"].get<std::string>();
        if (f == "complex") sys.complex_field = true;
        else if (f != "real")
            throw OpdynError(Errc::SchemaError, "scalar_field: expected \"real\" or \"complex\"");
    }
    if (j.contains("exact")) sys.exact = j["exact"].get<bool>();
    if (j.contains("invertible")) sys.invertibility_claim = j["invertible"].get<bool>();
    if (j.contains("name")) sys.name = j["name"].get<std::string>();

    for (std::size_t i = 0; i < j["orbits"].size(); ++i) {
        const auto& jo = j["orbits"][i];
        const std::string tag = "orbits[" + std::to_string(i) + "]";
        Orbit o;
        const std::string kind = jo.at("kind").get<std::string>();
        if (kind == "bilateral") o.kind = MapKind::BilateralChain;
        else if (kind == "cycle") o.kind = MapKind::Cycle;
        else if (kind == "unilateral") o.kind = MapKind::UnilateralChain;
        else
            throw OpdynError(Errc::SchemaError,
                             tag + ".kind: expected bilateral, cycle or unilateral");
        if (o.kind == MapKind::Cycle) {
            if (!jo.contains("length"))
                throw OpdynError(Errc::SchemaError, tag + ": cycle needs a length");
            o.cycle_length = jo["length"].get<std::int64_t>();
        }
        if (jo.contains("overrides")) {
            for (std::size_t k = 0; k < jo["overrides"].size(); ++k) {
                const auto& e = jo["overrides"][k];
                const std::string etag = tag + ".overrides[" + std::to_string(k) + "]";
                const auto pos = e.at("position").get<std::int64_t>();
                o.overrides[pos] = {parse_weight_field(e.at("weight"), etag + ".weight"),
                                    parse_rational_field(e.at("mass"), etag + ".mass")};
            }
        }
        if (jo.contains("forward_tail"))
            o.forward = parse_tail(jo["forward_tail"], tag + ".forward_tail");
        if (jo.contains("backward_tail"))
            o.backward = parse_tail(jo["backward_tail"], tag + ".backward_tail");
        sys.orbits.push_back(std::move(o));
    }
    check_well_formed(sys);
    return sys;
}

inline AtomicSystem parse_system_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // recover line/column from the byte offset
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
        throw OpdynError(Errc::ParseError, "line " + std::to_string(line) + ", column " +
                                               std::to_string(col) + ": " + e.what());
    }
    return parse_system_json(j);
}

inline AtomicSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw OpdynError(Errc::ParseError, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_system_text(buf.str());
}

inline Json tail_json(const TailSpec& t) {
    Json j;
    if (!t.transient.empty()) {
        Json arr = Json::array();
        for (const auto& e : t.transient)
            arr.push_back({{"weight", weight_json(e.weight)}, {"mass", rational_json(e.mass)}});
        j["transient"] = arr;
    }
    j["period"] = t.period;
    Json pw = Json::array();
    for (const auto& w : t.periodic_weights) pw.push_back(weight_json(w));
    j["periodic_weights"] = pw;
    j["mass_ratio"] = rational_json(t.mass_ratio);
    return j;
}

inline Json system_json(const AtomicSystem& sys) {
    Json j;
    if (!sys.name.empty()) j["name"] = sys.name;
    j["p"] = rational_json(sys.p);
    j["scalar_field"] = sys.complex_field ? "complex" : "real";
    if (sys.exact) j["exact"] = true;
    if (sys.invertibility_claim) j["invertible"] = *sys.invertibility_claim;
    Json orbits = Json::array();
    for (const auto& o : sys.orbits) {
        Json jo;
        jo["kind"] = map_kind_name(o.kind);
        if (o.kind == MapKind::Cycle) jo["length"] = o.cycle_length;
        if (!o.overrides.empty()) {
            Json arr = Json::array();
            for (const auto& [q, e] : o.overrides)
                arr.push_back({{"position", q},
                               {"weight", weight_json(e.weight)},
                               {"mass", rational_json(e.mass)}});
            jo["overrides"] = arr;
        }
        if (o.forward) jo["forward_tail"] = tail_json(*o.forward);
        if (o.backward) jo["backward_tail"] = tail_json(*o.backward);
        orbits.push_back(jo);
    }
    j["orbits"] = orbits;
    return j;
}

}  // namespace opdyn
