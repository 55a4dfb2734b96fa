#include <catch2/catch_amalgamated.hpp>

#include "opdyn/dissipative.hpp"
#include "support/fixtures.hpp"
#include "support/random_systems.hpp"

using namespace opdyn;
using opdyn_test::load_fixture;

namespace {

ConjugacyPackage build(const std::string& name) {
    const auto sys = load_fixture(name);
    return build_conjugacy(sys, hopf_decompose(sys));
}

}  // namespace

TEST_CASE("doubling shift: nu({m}) = 2^-m and constant factor weights u = 2") {
    const auto pkg = build("sys_a.json");
    for (std::int64_t m : {-3, -1, 0, 1, 2, 5, 40})
        CHECK(pkg.nu_exact({0, m}) == rat_pow(Rational(1, 2), m));
    for (std::int64_t k : {-10, -1, 0, 1, 7})
        CHECK(pkg.u_from_nu(k) == Catch::Approx(2.0).epsilon(1e-13));
    CHECK_FALSE(pkg.nu_finite);
    // the wandering indicator is fixed by Pi (w^(0) = 1 on W)
    CHECK(pkg.transport_exact({0, 0}) == Scalar::one());
    // transport multiplies the coordinate-m bump by 2^m
    SampleFunction bump;
    bump.support[{0, 3}] = Scalar::one();
    const auto out = apply_pi(pkg, to_typed<ExactArith>(bump), PiDirection::Forward);
    CHECK(out.support.at({0, 3}) == Scalar(Rational(8)));
}

TEST_CASE("unit weight: the conjugation collapses to the identity") {
    const auto pkg = build("sys_b.json");
    for (std::int64_t m : {-5, 0, 5}) {
        CHECK(pkg.nu_exact({0, m}) == Rational(1));
        CHECK(pkg.transport_exact({0, m}) == Scalar::one());
    }
    SampleRng rng(3);
    const auto phi = to_typed<ExactArith>(random_sample(pkg.system, rng));
    const auto moved = apply_pi(pkg, phi, PiDirection::Forward);
    CHECK(detail_dis::sample_gap(moved, phi, nullptr) == 0.0);
}

TEST_CASE("dyadic masses: nu = mu with total 3, alternating factor weights") {
    const auto pkg = build("sys_d.json");
    CHECK(pkg.nu_finite);
    REQUIRE(pkg.nu_total_exact);
    CHECK(*pkg.nu_total_exact == Rational(3));
    for (std::int64_t m : {-4, -1, 0, 1, 4})
        CHECK(pkg.nu_exact({0, m}) == rat_pow(Rational(1, 2), std::abs(m)));
    // u_k = (nu(f^{k-1}W)/nu(f^kW))^{1/p}: 1/2 for k <= 0 and 2 for k >= 1
    CHECK(pkg.u_from_nu(0) == Catch::Approx(0.5));
    CHECK(pkg.u_from_nu(-3) == Catch::Approx(0.5));
    CHECK(pkg.u_from_nu(1) == Catch::Approx(2.0));
    CHECK(pkg.u_from_nu(4) == Catch::Approx(2.0));
}

TEST_CASE("pi roundtrip is the identity") {
    const auto pkg = build("sys_d.json");
    SampleRng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto phi = to_typed<ExactArith>(random_sample(pkg.system, rng));
        const auto round =
            apply_pi(pkg, apply_pi(pkg, phi, PiDirection::Forward), PiDirection::Inverse);
        CHECK(detail_dis::sample_gap(round, phi, nullptr) == 0.0);
    }
}

TEST_CASE("verify_conjugacy passes on the bundled dissipative fixtures") {
    for (const char* name : {"sys_a.json", "sys_b.json", "sys_d.json", "sys_e_identical.json"}) {
        const auto sys = load_fixture(name);
        const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
        const auto rep = verify_conjugacy(pkg, sys, 100, 7);
        CHECK(rep.exact_mode);
        CHECK(rep.max_isometry_dev == 0.0);
        CHECK(rep.max_intertwine_dev == 0.0);
        CHECK(rep.max_roundtrip_dev == 0.0);
    }
}

TEST_CASE("verify_conjugacy in floating mode stays within tolerance") {
    auto sys = load_fixture("sys_d.json");
    sys.exact = false;
    const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
    const auto rep = verify_conjugacy(pkg, sys, 100, 7);
    CHECK_FALSE(rep.exact_mode);
    CHECK(rep.max_isometry_dev <= 1e-10);
    CHECK(rep.max_intertwine_dev <= 1e-12);
}

TEST_CASE("corrupted transport is caught with a counterexample") {
    // package built from a tampered copy of the system: its transport data no
    // longer matches the operator being verified
    const auto sys = load_fixture("sys_a.json");
    auto tampered = sys;
    tampered.orbits[0].forward->periodic_weights[0] = Scalar(Rational(5));
    const auto pkg = build_conjugacy(tampered, hopf_decompose(tampered));
    CHECK_THROWS_AS(verify_conjugacy(pkg, sys, 50, 0), OpdynError);
    try {
        verify_conjugacy(pkg, sys, 50, 0);
    } catch (const OpdynError& e) {
        CHECK(e.code() == Errc::VerificationFailed);
    }
}

TEST_CASE("conjugation is refused off the dissipative class") {
    const auto mixed = load_fixture("sys_mixed.json");
    CHECK_THROWS_AS(build_conjugacy(mixed, hopf_decompose(mixed)), OpdynError);
    try {
        build_conjugacy(mixed, hopf_decompose(mixed));
    } catch (const OpdynError& e) {
        CHECK(e.code() == Errc::NotDissipative);
    }
}

TEST_CASE("measure identity: transported nu equals the direct mu_n sums", "[property]") {
    for (const char* name : {"sys_a.json", "sys_d.json", "sys_e_identical.json"}) {
        const auto pkg = build(name);
        SampleRng rng(55);
        for (int trial = 0; trial < 200; ++trial) {
            // random finite B; nu(B) = sum over n of mu_n(B cap f^{-n}(W))
            Rational nu_direct = 0, nu_pkg = 0;
            const std::int64_t sz = rng.uniform(1, 6);
            for (std::int64_t i = 0; i < sz; ++i) {
                const auto orbit = static_cast<std::int32_t>(
                    rng.uniform(0, static_cast<std::int64_t>(pkg.system.orbits.size()) - 1));
                const AtomId a{orbit, rng.uniform(-20, 20)};
                // B cap f^{-n}(W) is the singleton {a} exactly when n = -position
                nu_direct += mu_n_exact(pkg.system, {a}, -a.position);
                nu_pkg += pkg.nu_exact(a);
            }
            CHECK(nu_direct == nu_pkg);
        }
    }
}

TEST_CASE("distortion: single orbit gives K = 1, equal weights give K = 1") {
    const auto one = build("sys_a.json");
    CHECK(one.distortion.bounded);
    CHECK(one.distortion.K == 1.0);
    const auto twin = build("sys_e_identical.json");
    CHECK(twin.distortion.bounded);
    REQUIRE(twin.distortion.K_exact);
    CHECK(*twin.distortion.K_exact == Rational(1));
}

TEST_CASE("distortion: rates 2 vs 3 diverge with a growing witness spread") {
    const auto pkg = build("sys_e.json");
    CHECK_FALSE(pkg.distortion.bounded);
    REQUIRE(pkg.distortion.witnesses.size() >= 2);
    const auto& w0 = pkg.distortion.witnesses[0];
    const auto& w1 = pkg.distortion.witnesses[1];
    CHECK(std::abs(w1.k) > std::abs(w0.k));
    CHECK(w1.ratio_log10 > w0.ratio_log10);  // the spread keeps growing
    CHECK_THROWS_AS(shift_factor(pkg, 10), OpdynError);
}

TEST_CASE("distortion constant agrees between (mu,f,w) and the derived (nu,f,1)") {
    for (const char* name : {"sys_d.json", "sys_e_identical.json", "sys_a.json"}) {
        const auto pkg = build(name);
        const auto derived = derived_unweighted_system(pkg);
        const auto derived_decomp = hopf_decompose(derived);
        const auto kd = check_bounded_distortion(derived, derived_decomp);
        REQUIRE(pkg.distortion.bounded == kd.bounded);
        CHECK(std::abs(pkg.distortion.K - kd.K) <= 1e-12 * std::max(1.0, pkg.distortion.K));
        if (pkg.distortion.K_exact && kd.K_exact) CHECK(*pkg.distortion.K_exact == *kd.K_exact);
        // the derived system reproduces nu atom by atom
        for (std::int64_t q : {-9, -2, 0, 3, 11})
            CHECK(derived.atom({0, q}).mass == pkg.nu_exact({0, q}));
    }
}

TEST_CASE("factor weights agree between the nu ratios and the direct formula") {
    for (const char* name : {"sys_a.json", "sys_b.json", "sys_d.json"}) {
        const auto pkg = build(name);
        for (std::int64_t k = -40; k <= 40; ++k) {
            const double a = pkg.u_from_nu(k);
            const double b = pkg.u_direct(k);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("shift factor: window, tail factors and intertwining checks") {
    const auto pkg = build("sys_a.json");
    const auto sf = shift_factor(pkg, 5);
    REQUIRE(sf.u.size() == 11);
    for (double u : sf.u) CHECK(u == Catch::Approx(2.0));
    const auto rep = verify_shift_factor(pkg, 50, 3);
    CHECK(rep.max_gamma_dev <= 1e-10);
    CHECK(rep.max_composite_dev <= 1e-10);

    const auto pkg_d = build("sys_d.json");
    const auto rep_d = verify_shift_factor(pkg_d, 50, 3);
    CHECK(rep_d.max_gamma_dev <= 1e-10);
    CHECK(rep_d.max_composite_dev <= 1e-10);

    const auto flat = build("sys_b.json");
    const auto sf_b = shift_factor(flat, 3);
    for (double u : sf_b.u) CHECK(u == Catch::Approx(1.0));
}

TEST_CASE("gamma evaluates the wandering-window averages") {
    const auto pkg = build("sys_b.json");
    SampleFunction chiW;
    chiW.support[{0, 0}] = Scalar::one();
    const auto g = gamma_apply(pkg, to_typed<LogArith>(chiW));
    REQUIRE(g.count(0) == 1);
    CHECK(g.at(0).mod.value() == Catch::Approx(1.0));
    CHECK(g.at(0).arg == Catch::Approx(0.0));
}

TEST_CASE("chaos classification across the fixture library") {
    const auto d = build("sys_d.json");
    CHECK(d.chaos.nu_finite);
    CHECK(d.chaos.devaney == Status::ProvenTrue);
    CHECK(d.chaos.mixing == Status::ProvenTrue);
    CHECK(d.chaos.frequently_hypercyclic == Status::ProvenTrue);
    CHECK(d.chaos.frequently_recurrent == Status::ProvenTrue);

    const auto a = build("sys_a.json");
    CHECK_FALSE(a.chaos.nu_finite);
    CHECK(a.chaos.devaney == Status::ProvenFalse);
    CHECK(a.chaos.frequently_recurrent == Status::ProvenFalse);  // bounded distortion

    const auto b = build("sys_b.json");
    CHECK(b.chaos.devaney == Status::ProvenFalse);

    const auto e = build("sys_e.json");  // unbounded distortion, infinite nu
    CHECK(e.chaos.devaney == Status::ProvenFalse);
    CHECK(e.chaos.frequently_hypercyclic == Status::Unknown);
    CHECK(e.chaos.frequently_recurrent == Status::Unknown);
}

TEST_CASE("fractional exponents run the conjugation in floating arithmetic") {
    auto sys = load_fixture("sys_a.json");
    sys.p = Rational(3, 2);
    sys.exact = false;
    const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
    // nu({m}) = |w^(-m)|^p = 2^(-3m/2)
    CHECK(std::exp(pkg.nu_log({0, 2})) == Catch::Approx(std::pow(2.0, -3.0)));
    // u_k = (2^{3/2})^{2/3} = 2: the factor shift mirrors the constant weight
    CHECK(pkg.u_from_nu(5) == Catch::Approx(2.0).epsilon(1e-12));
    const auto rep = verify_conjugacy(pkg, sys, 50, 2);
    CHECK(rep.max_isometry_dev <= 1e-10);
    CHECK(rep.max_intertwine_dev <= 1e-12);
}

TEST_CASE("complex weights run the conjugation through the polar path") {
    AtomicSystem sys;
    sys.p = 1;
    sys.complex_field = true;
    Orbit o;
    o.kind = MapKind::BilateralChain;
    TailSpec t;
    t.period = 1;
    t.periodic_weights = {Scalar(Rational(0), Rational(2))};  // w = 2i
    o.forward = t;
    o.backward = t;
    sys.orbits.push_back(o);
    check_well_formed(sys);

    const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
    CHECK_FALSE(pkg.nu_finite);
    // |w| = 2 everywhere: nu agrees with the real doubling fixture
    CHECK(std::exp(pkg.nu_log({0, 3})) == Catch::Approx(0.125));
    const auto rep = verify_conjugacy(pkg, sys, 60, 9);
    CHECK_FALSE(rep.exact_mode);
    CHECK(rep.max_isometry_dev <= 1e-10);
    CHECK(rep.max_intertwine_dev <= 1e-12);
    const auto srep = verify_shift_factor(pkg, 30, 9);
    CHECK(srep.max_gamma_dev <= 1e-10);
}

TEST_CASE("closed-form nu matches direct products on random multi-period systems",
          "[property]") {
    SampleRng rng(4711);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sys = opdyn_test::random_bilateral_system(rng);
        const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
        for (std::int32_t i : pkg.decomposition.dissipative_orbits) {
            for (std::int64_t k = -45; k <= 45; ++k) {
                const AtomId x{i, k};
                CHECK(pkg.nu_exact(x) == pkg.nu_direct_exact(x));
                CHECK(std::abs(pkg.nu_log(x) - pkg.nu_direct_log(x)) <=
                      1e-10 * std::max(1.0, std::abs(pkg.nu_direct_log(x))));
            }
        }
    }
}

TEST_CASE("conjugation identities hold on random multi-period systems", "[property]") {
    SampleRng rng(2026);
    int bounded_seen = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto sys = opdyn_test::random_bilateral_system(rng);
        const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
        const auto rep = verify_conjugacy(pkg, sys, 25, 13);
        CHECK(rep.exact_mode);
        for (std::int64_t k = -50; k <= 50; ++k) {
            const double u1 = pkg.u_from_nu(k), u2 = pkg.u_direct(k);
            CHECK(std::abs(u1 - u2) <= 1e-12 * std::max(1.0, std::abs(u1)));
        }
        if (pkg.distortion.bounded) {
            ++bounded_seen;
            const auto srep = verify_shift_factor(pkg, 20, 13);
            CHECK(srep.max_gamma_dev <= 1e-10);
            CHECK(srep.max_composite_dev <= 1e-10);
            const auto derived = derived_unweighted_system(pkg);
            const auto kd = check_bounded_distortion(derived, hopf_decompose(derived));
            CHECK(kd.bounded);
            CHECK(std::abs(pkg.distortion.K - kd.K) <=
                  1e-10 * std::max(1.0, pkg.distortion.K));
        }
    }
    CHECK(bounded_seen > 0);
}

TEST_CASE("distortion: equal rates across different periods give a finite K") {
    // orbit 0: w = 4 (period 1); orbit 1: w alternating 2, 8 (period 2): both
    // transported measures decay by 1/4 per step, out of phase
    AtomicSystem sys;
    sys.p = 1;
    sys.exact = true;
    Orbit a;
    a.kind = MapKind::BilateralChain;
    TailSpec ta;
    ta.period = 1;
    ta.periodic_weights = {Scalar(Rational(4))};
    a.forward = ta;
    a.backward = ta;
    Orbit b;
    b.kind = MapKind::BilateralChain;
    TailSpec tb;
    tb.period = 2;
    tb.periodic_weights = {Scalar(Rational(2)), Scalar(Rational(8))};
    b.forward = tb;
    b.backward = tb;
    sys.orbits.push_back(a);
    sys.orbits.push_back(b);
    check_well_formed(sys);

    const auto pkg = build_conjugacy(sys, hopf_decompose(sys));
    REQUIRE(pkg.distortion.bounded);
    CHECK(pkg.distortion.K > 1.0);
    const auto derived = derived_unweighted_system(pkg);
    const auto kd = check_bounded_distortion(derived, hopf_decompose(derived));
    CHECK(std::abs(pkg.distortion.K - kd.K) <= 1e-12 * pkg.distortion.K);
    const auto rep = verify_shift_factor(pkg, 40, 21);
    CHECK(rep.max_gamma_dev <= 1e-10);
}

TEST_CASE("finite nu forces the excision criterion orbitwise") {
    for (const char* name : {"sys_a.json", "sys_b.json", "sys_d.json", "sys_e.json"}) {
        const auto pkg = build(name);
        const auto flags = devaney_orbit_sums_finite(pkg);
        const bool all_finite =
            std::all_of(flags.begin(), flags.end(), [](bool f) { return f; });
        CHECK(all_finite == pkg.nu_finite);
        if (pkg.nu_finite) CHECK(pkg.chaos.devaney == Status::ProvenTrue);
    }
}
