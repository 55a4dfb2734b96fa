#include <catch2/catch_amalgamated.hpp>

#include "opdyn/atomic_system.hpp"
#include "support/fixtures.hpp"

using namespace opdyn;
using opdyn_test::load_fixture;

namespace {

std::vector<AtomId> singleton(std::int32_t orbit, std::int64_t pos) {
    return {AtomId{orbit, pos}};
}

}  // namespace

TEST_CASE("validate: constant doubling weights give c = 2 and c~ = 1/2") {
    const auto sys = load_fixture("sys_a.json");
    const auto cert = validate(sys);
    CHECK(cert.c == Catch::Approx(2.0));
    REQUIRE(cert.c_exact);
    CHECK(*cert.c_exact == Rational(2));
    REQUIRE(cert.c_tilde);
    CHECK(*cert.c_tilde == Catch::Approx(0.5));
    CHECK(*cert.c_tilde_exact == Rational(1, 2));
}

TEST_CASE("validate: the unweighted shift is an isometry certificate c = c~ = 1") {
    const auto sys = load_fixture("sys_b.json");
    const auto cert = validate(sys);
    CHECK(*cert.c_exact == Rational(1));
    CHECK(*cert.c_tilde_exact == Rational(1));
}

TEST_CASE("validate: mass step 2^-|n| yields c = 2 where the masses halve") {
    // mu({n})/mu({n+1}) = 2 exactly where |n| grows along the map, i.e. n >= 0
    const auto sys = load_fixture("sys_d.json");
    const auto cert = validate(sys);
    CHECK(*cert.c_exact == Rational(2));
    CHECK(cert.c_witness.position >= 0);
    CHECK(*cert.c_tilde_exact == Rational(2));
}

TEST_CASE("validate: error paths") {
    CHECK_THROWS_AS(validate(load_fixture("negative/zero_weight_invertible.json")), OpdynError);
    try {
        validate(load_fixture("negative/zero_weight_invertible.json"));
    } catch (const OpdynError& e) {
        CHECK(e.code() == Errc::ZeroWeight);
    }
    // c~ cannot be requested on a unilateral chain: the certificate omits it
    const auto uni = load_fixture("sys_unilateral.json");
    CHECK_FALSE(validate(uni).c_tilde);
    CHECK_THROWS_AS(cocycle_log(uni, {0, 5}, -1), OpdynError);
}

TEST_CASE("cocycle: constant weight products and the zero-step convention") {
    const auto sys = load_fixture("sys_a.json");
    CHECK(cocycle_exact(sys, {0, 3}, 5) == Scalar(Rational(32)));
    CHECK(cocycle_exact(sys, {0, -7}, 0) == Scalar::one());
    CHECK(cocycle_log(sys, {0, 2}, 0).mod.value() == 1.0);
    // w^(-3) = 1/8, and w^(-n) o f^n is the reciprocal of w^(n)
    CHECK(cocycle_exact(sys, {0, 0}, -3) == Scalar(Rational(1, 8)));
    const Scalar forward = cocycle_exact(sys, {0, 0}, 3);
    const Scalar back_at_image = cocycle_exact(sys, {0, 3}, -3);
    CHECK(forward * back_at_image == Scalar::one());
}

TEST_CASE("cocycle law on random points", "[property]") {
    for (const char* name : {"sys_a.json", "sys_c.json", "sys_d.json", "sys_h.json"}) {
        const auto sys = load_fixture(name);
        SampleRng rng(17);
        for (int trial = 0; trial < 200; ++trial) {
            const AtomId x{0, rng.uniform(-30, 30)};
            const std::int64_t m = rng.uniform(-25, 25), n = rng.uniform(-25, 25);
            const Scalar lhs = cocycle_exact(sys, x, m + n);
            const Scalar rhs =
                cocycle_exact(sys, x, n) * cocycle_exact(sys, sys.apply_map(x, n), m);
            CHECK(lhs == rhs);
            const LogScalar log_lhs = cocycle_log(sys, x, m + n);
            const LogScalar log_rhs =
                cocycle_log(sys, x, n) * cocycle_log(sys, sys.apply_map(x, n), m);
            if (!log_lhs.is_zero())
                CHECK(std::abs(log_lhs.mod.lg - log_rhs.mod.lg) <=
                      1e-12 * std::max(1.0, std::abs(log_lhs.mod.lg)));
        }
    }
}

TEST_CASE("mu_n examples: unit weight, doubling weight, dyadic masses") {
    const auto sys_b = load_fixture("sys_b.json");
    CHECK(mu_n_exact(sys_b, singleton(0, 4), 12) == Rational(1));
    CHECK(mu_n_exact(sys_b, singleton(0, 4), -9) == Rational(1));

    // |w^(2)|^p mu = 2^2 * 1 at p = 1, confirmed by the direct integral
    const auto sys_a = load_fixture("sys_a.json");
    CHECK(mu_n_exact(sys_a, singleton(0, 0), 2) == Rational(4));
    CHECK(mu_n_log(sys_a, singleton(0, 0), 2).value() == Catch::Approx(4.0));

    const auto sys_d = load_fixture("sys_d.json");
    CHECK(mu_n_exact(sys_d, singleton(0, -3), 0) == Rational(1, 8));
}

TEST_CASE("apply_operator transports support exactly") {
    const auto sys_b = load_fixture("sys_b.json");
    SampleFunction chi0;
    chi0.support[{0, 0}] = Scalar::one();
    const auto moved = apply_operator(sys_b, to_typed<ExactArith>(chi0), 1);
    REQUIRE(moved.support.size() == 1);
    CHECK(moved.support.begin()->first == AtomId{0, -1});
    CHECK(moved.support.begin()->second == Scalar::one());

    const auto sys_a = load_fixture("sys_a.json");
    const auto twice = apply_operator(sys_a, to_typed<ExactArith>(chi0), 2);
    REQUIRE(twice.support.size() == 1);
    CHECK(twice.support.begin()->first == AtomId{0, -2});
    CHECK(twice.support.begin()->second == Scalar(Rational(4)));
    CHECK(p_norm_pow_exact(sys_a, twice) == Rational(4));
}

TEST_CASE("apply_operator: inverse identity and unilateral annihilation") {
    const auto sys = load_fixture("sys_d.json");
    SampleRng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const SampleFunction phi = random_sample(sys, rng);
        const auto typed = to_typed<ExactArith>(phi);
        const std::int64_t n = rng.uniform(-20, 20);
        const auto round = apply_operator(sys, apply_operator(sys, typed, n), -n);
        REQUIRE(round.support.size() == typed.support.size());
        for (const auto& [a, v] : typed.support) {
            REQUIRE(round.support.count(a) == 1);
            CHECK(round.support.at(a) == v);
        }
    }
    // the head indicator of a unilateral chain is annihilated in one step
    const auto uni = load_fixture("sys_unilateral.json");
    SampleFunction head;
    head.support[{0, 0}] = Scalar::one();
    CHECK(apply_operator(uni, to_typed<ExactArith>(head), 1).support.empty());
}

TEST_CASE("norm identity: ||C^n chi_B||_p^p = mu_n(f^{-n}(B))", "[property]") {
    for (const char* name : {"sys_a.json", "sys_c.json", "sys_d.json"}) {
        const auto sys = load_fixture(name);
        SampleRng rng(99);
        for (int trial = 0; trial < 60; ++trial) {
            std::vector<AtomId> B;
            const std::int64_t sz = rng.uniform(1, 5);
            for (std::int64_t i = 0; i < sz; ++i) B.push_back({0, rng.uniform(-20, 20)});
            const std::int64_t n = rng.uniform(-30, 30);
            SampleFunction chi;
            for (const auto& a : B) chi.support[a] = Scalar::one();
            const auto image = apply_operator(sys, to_typed<ExactArith>(chi), n);
            const Rational lhs = p_norm_pow_exact(sys, image);
            // de-duplicate B before integrating
            std::vector<AtomId> uniq;
            for (const auto& [a, v] : chi.support) uniq.push_back(a);
            const Rational rhs = mu_n_exact(sys, preimage_set(sys, uniq, n), n);
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("certificate constant bounds the one-step norm growth", "[property]") {
    for (const char* name : {"sys_a.json", "sys_c.json", "sys_d.json", "sys_g.json"}) {
        const auto sys = load_fixture(name);
        const auto cert = validate(sys);
        SampleRng rng(2024);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto phi = to_typed<ExactArith>(random_sample(sys, rng));
            const Rational before = p_norm_pow_exact(sys, phi);
            const Rational after = p_norm_pow_exact(sys, apply_operator(sys, phi, 1));
            CHECK(after <= *cert.c_exact * before);
        }
    }
}

TEST_CASE("tail mass layout: transient then periodic with per-period ratio") {
    TailSpec t;
    t.transient = {{Scalar(Rational(5)), Rational(3)}, {Scalar(Rational(7)), Rational(2)}};
    t.period = 2;
    t.periodic_weights = {Scalar(Rational(1, 2)), Scalar(Rational(4))};
    t.mass_ratio = Rational(1, 10);
    CHECK(t.at(1).mass == Rational(3));
    CHECK(t.at(2).mass == Rational(2));
    // base masses repeat the last full transient period, scaled once per period
    CHECK(t.at(3).mass == Rational(3, 10));
    CHECK(t.at(4).mass == Rational(2, 10));
    CHECK(t.at(5).mass == Rational(3, 100));
    CHECK(t.at(3).weight == Scalar(Rational(1, 2)));
    CHECK(t.at(4).weight == Scalar(Rational(4)));
    CHECK(t.log_mass_at(5) == Catch::Approx(std::log(0.03)));
}

TEST_CASE("complex weights: polar cocycles and operator application") {
    // w = 2i on a bilateral chain: |w^(n)| = 2^n with a quarter-turn per step
    AtomicSystem sys;
    sys.p = 2;
    sys.complex_field = true;
    Orbit o;
    o.kind = MapKind::BilateralChain;
    TailSpec t;
    t.period = 1;
    t.periodic_weights = {Scalar(Rational(0), Rational(2))};
    o.forward = t;
    o.backward = t;
    sys.orbits.push_back(o);
    check_well_formed(sys);
    CHECK_FALSE(sys.exact_capable());

    const LogScalar w4 = cocycle_log(sys, {0, 0}, 4);
    CHECK(w4.mod.value() == Catch::Approx(16.0));
    CHECK(std::abs(std::remainder(w4.arg, 2 * std::acos(-1.0))) < 1e-12);  // (2i)^4 = 16
    const LogScalar w1 = cocycle_log(sys, {0, 0}, 1);
    CHECK(w1.real_part() == Catch::Approx(0.0).margin(1e-12));
    CHECK(w1.imag_part() == Catch::Approx(2.0));

    // mu_n only sees |w|: mu_2(f^-2 {x}) = (2^2)^p = 16 at p = 2
    CHECK(mu_n_log(sys, {{0, -2}}, 2).value() == Catch::Approx(16.0));
}

TEST_CASE("well-formedness: window gaps and bad tails are refused") {
    auto sys = load_fixture("sys_a.json");
    sys.orbits[0].overrides[3] = {Scalar(Rational(1)), Rational(1)};  // gap at 0..2
    CHECK_THROWS_AS(check_well_formed(sys), OpdynError);

    auto cyc = load_fixture("sys_f.json");
    cyc.orbits[0].overrides[5] = {Scalar(Rational(1)), Rational(1)};  // outside length 3
    CHECK_THROWS_AS(check_well_formed(cyc), OpdynError);
}
