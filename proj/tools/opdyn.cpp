// opdyn: analyzes weighted composition operators on countable atomic systems.
// Subcommands cover boundedness validation, Hopf decomposition, the
// expansivity notions on L^p and on discrete continuous-function spaces, the
// dissipative conjugation to an unweighted composition operator, and its
// chaos classification.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "opdyn/report.hpp"

namespace {

using namespace opdyn;

struct CommonOpts {
    std::string system_path;
    std::string output = "text";
    std::string out_path;
    std::int64_t horizon = 100;
    double threshold = 1e6;
    int samples = 100;
    std::uint64_t seed = 0;
    bool force_exact = false;
    bool force_float = false;
    std::int64_t window = 8;
    std::int64_t trace_orbit = 0;
    std::int64_t trace_position = 0;
    std::string rates_csv_path;
    std::string package_path;
};

std::int64_t default_horizon() {
    if (const char* env = std::getenv("OPDYN_HORIZON")) {
        const long long v = std::atoll(env);
        if (v >= 1) return v;
    }
    return 100;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_samples = false) {
    cmd->add_option("system", o.system_path, "system description file (JSON)")->required();
    cmd->add_option("--output", o.output, "report format: text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    cmd->add_option("-o,--out", o.out_path, "write the report to this path");
    cmd->add_option("--horizon", o.horizon, "finite scan horizon")->check(CLI::PositiveNumber);
    cmd->add_flag("--exact", o.force_exact, "force exact rational arithmetic");
    cmd->add_flag("--float", o.force_float, "force log-domain floating arithmetic");
    cmd->add_option("--trace-orbit", o.trace_orbit, "orbit of the CSV trace atom");
    cmd->add_option("--trace-position", o.trace_position, "position of the CSV trace atom");
    if (with_samples) {
        cmd->add_option("--samples", o.samples, "number of seeded verification samples")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", o.seed, "RNG seed for verification samples");
    }
}

AtomicSystem load(const CommonOpts& o) {
    AtomicSystem sys = load_system(o.system_path);
    if (o.force_exact) sys.exact = true;
    if (o.force_float) sys.exact = false;
    if (sys.exact && !sys.exact_capable())
        throw OpdynError(Errc::PreconditionFailed,
                         "exact mode needs a real scalar field and integer p");
    return sys;
}

void emit(const CommonOpts& o, const std::string& body) {
    if (o.out_path.empty()) {
        std::cout << body;
        if (!body.empty() && body.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out) throw OpdynError(Errc::ParseError, "cannot write " + o.out_path);
    out << body;
}

std::string verdict_text(const std::string& title, const Verdict& v) {
    std::string s = title + ": " + status_name(v.status) + "\n";
    s += "  horizon: " + std::to_string(v.horizon) + "\n";
    if (v.witness)
        s += "  witness: atom " + atom_str(v.witness->atom) + ", n = " +
             std::to_string(v.witness->n) + ", log10 value = " + fmt_g(v.witness->log10_value) +
             "\n";
    if (!v.detail.empty()) s += "  " + v.detail + "\n";
    return s;
}

Json report_all_json(const AtomicSystem& sys, const CommonOpts& o) {
    Json all;
    all["system"] = system_json(sys);
    all["horizon"] = o.horizon;
    all["seed"] = o.seed;
    all["validate"] = certificate_json(validate(sys));
    if (sys.map_bijective()) {
        const auto d = hopf_decompose(sys);
        all["hopf"] = decomposition_json(d);
        all["dissipative"] = is_dissipative(sys);
    }
    Json lp;
    for (Notion n : {Notion::Expansive, Notion::Average, Notion::Uniform, Notion::Positive,
                     Notion::AveragePositive, Notion::UniformPositive}) {
        const bool bilateral =
            n == Notion::Expansive || n == Notion::Average || n == Notion::Uniform;
        if (bilateral && !sys.invertible()) continue;
        lp[notion_name(n)] = verdict_json(analyze_lp(sys, n, o.horizon));
    }
    all["lp_expansivity"] = lp;
    Json cfs;
    for (SpaceKind sp : {SpaceKind::BoundedFunctions, SpaceKind::VanishingAtInfinity,
                         SpaceKind::CompactConvergence, SpaceKind::PointwiseConvergence}) {
        Json per;
        for (Notion n : {Notion::Expansive, Notion::Average, Notion::Uniform, Notion::Positive,
                         Notion::AveragePositive, Notion::UniformPositive}) {
            const bool bilateral =
                n == Notion::Expansive || n == Notion::Average || n == Notion::Uniform;
            if (bilateral && !sys.invertible()) continue;
            per[notion_name(n)] = verdict_json(analyze_cfs(sys, sp, n, o.horizon));
        }
        cfs[space_name(sp)] = per;
    }
    all["cfs_expansivity"] = cfs;
    if (sys.invertible() && is_dissipative(sys)) {
        const auto d = hopf_decompose(sys);
        const auto pkg = build_conjugacy(sys, d);
        all["conjugacy"] = package_json(pkg, o.window);
        all["verify"] = verification_json(verify_conjugacy(pkg, sys, o.samples, o.seed));
    }
    return all;
}

}  // namespace

int main(int argc, char** argv) try {
    CLI::App app{"operator dynamics analyzer for weighted composition operators"};
    app.require_subcommand(1);

    CommonOpts o;
    o.horizon = default_horizon();

    std::string space_arg = "lp";
    std::string notion_arg = "expansive";

    auto* c_validate = app.add_subcommand("validate", "boundedness certificate");
    add_common(c_validate, o);
    auto* c_hopf = app.add_subcommand("hopf", "Hopf decomposition and wandering set");
    add_common(c_hopf, o);
    auto* c_exp = app.add_subcommand("expansivity", "expansivity notions on L^p");
    add_common(c_exp, o);
    c_exp->add_option("--space", space_arg, "analysis space (lp)")
        ->check(CLI::IsMember({"lp"}));
    c_exp->add_option("--notion", notion_arg,
                      "expansive, average, uniform, positive, average_positive, "
                      "uniform_positive, or all");
    c_exp->add_option("--threshold", o.threshold,
                      "witness divergence threshold relative to the value at n = 1");
    c_exp->add_option("--rates-csv", o.rates_csv_path, "also write the rate table as CSV");
    auto* c_cfs = app.add_subcommand("cfs", "expansivity on continuous-function spaces");
    add_common(c_cfs, o);
    std::string cfs_space = "c0";
    c_cfs->add_option("--space", cfs_space, "lb, c0, compact or pointwise")
        ->check(CLI::IsMember({"lb", "c0", "compact", "pointwise"}));
    c_cfs->add_option("--notion", notion_arg,
                      "expansive, average, uniform, positive, average_positive, "
                      "uniform_positive, or all");
    auto* c_conj = app.add_subcommand("conjugate", "dissipative conjugation package");
    add_common(c_conj, o);
    c_conj->add_option("--window", o.window, "nu/u table radius in the report");
    auto* c_verify = app.add_subcommand("verify", "verify the conjugation on seeded samples");
    add_common(c_verify, o, true);
    c_verify->add_option("--package", o.package_path,
                         "previously emitted package JSON to verify against the system");
    auto* c_classify = app.add_subcommand("classify", "chaos classification");
    add_common(c_classify, o);
    auto* c_all = app.add_subcommand("report-all", "every applicable analysis in one report");
    add_common(c_all, o, true);
    c_all->add_option("--window", o.window, "nu/u table radius in the report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // --help succeeds; usage errors are input errors
    }

    try {
        if (c_validate->parsed()) {
            const auto sys = load(o);
            const auto cert = validate(sys);
            if (o.output == "json") emit(o, certificate_json(cert).dump(2) + "\n");
            else {
                std::string s = "c = " + fmt_g(cert.c);
                if (cert.c_exact) s += " (exact " + rational_str(*cert.c_exact) + ")";
                s += ", witness " + atom_str(cert.c_witness) + "\n";
                if (cert.c_tilde) {
                    s += "c~ = " + fmt_g(*cert.c_tilde);
                    if (cert.c_tilde_exact)
                        s += " (exact " + rational_str(*cert.c_tilde_exact) + ")";
                    s += ", witness " + atom_str(cert.c_tilde_witness) + "\n";
                }
                emit(o, s);
            }
        } else if (c_hopf->parsed()) {
            const auto sys = load(o);
            const auto d = hopf_decompose(sys);
            if (o.output == "json") emit(o, decomposition_json(d).dump(2) + "\n");
            else {
                std::string s;
                s += "conservative orbits: " + std::to_string(d.conservative_orbits.size());
                s += ", dissipative orbits: " + std::to_string(d.dissipative_orbits.size());
                s += "\nwandering mass: " + rational_str(d.wandering_mass) + "\n";
                s += std::string("dissipative: ") + (is_dissipative(sys) ? "yes" : "no") + "\n";
                emit(o, s);
            }
        } else if (c_exp->parsed() || c_cfs->parsed()) {
            const auto sys = load(o);
            const bool is_lp = c_exp->parsed();
            std::vector<Notion> notions;
            if (notion_arg == "all") {
                for (Notion n : {Notion::Expansive, Notion::Average, Notion::Uniform,
                                 Notion::Positive, Notion::AveragePositive,
                                 Notion::UniformPositive})
                    notions.push_back(n);
            } else {
                notions.push_back(notion_from_name(notion_arg));
            }
            if (o.output == "csv") {
                const AtomId at{static_cast<std::int32_t>(o.trace_orbit), o.trace_position};
                emit(o, is_lp ? plot_csv_lp(sys, at, o.horizon)
                              : plot_csv_cfs(sys, at, o.horizon));
            } else {
                Json j;
                std::string txt;
                std::string rates_csv;
                for (Notion n : notions) {
                    const Verdict v =
                        is_lp ? analyze_lp(sys, n, o.horizon, o.threshold)
                              : analyze_cfs(sys, space_from(cfs_space), n, o.horizon);
                    j[notion_name(n)] = verdict_json(v);
                    txt += verdict_text(notion_name(n), v);
                    if (rates_csv.empty()) rates_csv = rate_table_csv(v);
                }
                if (!o.rates_csv_path.empty()) {
                    std::ofstream rates(o.rates_csv_path, std::ios::binary);
                    if (!rates)
                        throw OpdynError(Errc::ParseError, "cannot write " + o.rates_csv_path);
                    rates << rates_csv;
                }
                emit(o, o.output == "json" ? j.dump(2) + "\n" : txt);
            }
        } else if (c_conj->parsed()) {
            const auto sys = load(o);
            const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
            if (o.output == "json") emit(o, package_json(pkg, o.window).dump(2) + "\n");
            else {
                std::string s;
                s += std::string("nu finite: ") + (pkg.nu_finite ? "yes" : "no") + "\n";
                if (pkg.nu_total_exact)
                    s += "nu(X) = " + rational_str(*pkg.nu_total_exact) + "\n";
                else if (pkg.nu_finite)
                    s += "nu(X) = " + fmt_g(std::exp(pkg.nu_total_log)) + "\n";
                s += "distortion K: " +
                     (pkg.distortion.bounded ? fmt_g(pkg.distortion.K) : "unbounded") + "\n";
                s += "u_0 = " + fmt_g(pkg.u_from_nu(0)) + ", u_1 = " + fmt_g(pkg.u_from_nu(1)) +
                     "\n";
                s += "devaney: " + std::string(status_name(pkg.chaos.devaney)) + ", mixing: " +
                     status_name(pkg.chaos.mixing) + ", frequently hypercyclic: " +
                     status_name(pkg.chaos.frequently_hypercyclic) + "\n";
                emit(o, s);
            }
        } else if (c_verify->parsed()) {
            const auto sys = load(o);
            ConjugacyPackage pkg;
            if (o.package_path.empty()) {
                pkg = build_conjugacy(sys, hopf_decompose(sys));
            } else {
                std::ifstream in(o.package_path);
                if (!in) throw OpdynError(Errc::ParseError, "cannot open " + o.package_path);
                std::stringstream buf;
                buf << in.rdbuf();
                pkg = package_from_json(Json::parse(buf.str()));
            }
            const auto rep = verify_conjugacy(pkg, sys, o.samples, o.seed);
            Json j = verification_json(rep);
            if (pkg.distortion.bounded) {
                const auto srep = verify_shift_factor(pkg, o.samples, o.seed);
                j["factor_max_gamma_deviation"] = finite_or_str(srep.max_gamma_dev);
                j["factor_max_composite_deviation"] = finite_or_str(srep.max_composite_dev);
            }
            if (o.output == "json") emit(o, j.dump(2) + "\n");
            else {
                std::string s = "verification passed (" + std::to_string(rep.samples) +
                                " samples, seed " + std::to_string(o.seed) + ")\n";
                s += "max isometry deviation: " + fmt_g(rep.max_isometry_dev) + "\n";
                s += "max intertwine deviation: " + fmt_g(rep.max_intertwine_dev) + "\n";
                s += "max roundtrip deviation: " + fmt_g(rep.max_roundtrip_dev) + "\n";
                emit(o, s);
            }
        } else if (c_classify->parsed()) {
            const auto sys = load(o);
            const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
            if (o.output == "json") emit(o, chaos_json(pkg.chaos).dump(2) + "\n");
            else {
                const auto& c = pkg.chaos;
                std::string s;
                s += std::string("nu finite: ") + (c.nu_finite ? "yes" : "no") + "\n";
                s += "Devaney chaotic: " + std::string(status_name(c.devaney)) + "\n";
                s += "topologically mixing: " + std::string(status_name(c.mixing)) + "\n";
                s += "frequently hypercyclic: " +
                     std::string(status_name(c.frequently_hypercyclic)) + "\n";
                s += "frequently recurrent: " +
                     std::string(status_name(c.frequently_recurrent)) + "\n";
                s += c.equivalences_note + "\n";
                emit(o, s);
            }
        } else if (c_all->parsed()) {
            const auto sys = load(o);
            emit(o, report_all_json(sys, o).dump(2) + "\n");
        }
    } catch (const OpdynError& e) {
        std::cerr << e.what() << "\n";
        return e.code() == Errc::VerificationFailed ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
} catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
}
