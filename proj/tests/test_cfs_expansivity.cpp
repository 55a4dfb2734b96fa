#include <catch2/catch_amalgamated.hpp>

#include "opdyn/cfs_expansivity.hpp"
#include "support/fixtures.hpp"
#include "support/shift_oracle.hpp"

using namespace opdyn;
using opdyn_test::load_fixture;

TEST_CASE("criterion value: |w^(n)| at the transported point, 0 off the member") {
    const auto sys = load_fixture("sys_a.json");
    CHECK(criterion_value(sys, {{0, 0}, std::nullopt}, 3) == Catch::Approx(8.0));
    // B disjoint from f^{-n}(O) uses the empty-set convention
    const std::vector<AtomId> B{{0, 5}, {0, 6}};
    CHECK(criterion_value(sys, {{0, 0}, B}, 3) == 0.0);
    const std::vector<AtomId> B2{{0, -3}};
    CHECK(criterion_value(sys, {{0, 0}, B2}, 3) == Catch::Approx(8.0));

    const auto sys_b = load_fixture("sys_b.json");
    CHECK(criterion_value(sys_b, {{0, 2}, std::nullopt}, 7) == Catch::Approx(1.0));
}

TEST_CASE("doubling shift on the sup-norm spaces is expansive") {
    const auto sys = load_fixture("sys_a.json");
    for (SpaceKind sp : {SpaceKind::BoundedFunctions, SpaceKind::VanishingAtInfinity}) {
        CHECK(analyze_cfs(sys, sp, Notion::Expansive, 100).status == Status::ProvenTrue);
        CHECK(analyze_cfs(sys, sp, Notion::Average, 100).status == Status::ProvenTrue);
        CHECK(analyze_cfs(sys, sp, Notion::Uniform, 100).status == Status::ProvenTrue);
    }
}

TEST_CASE("shifts on compact-convergence and pointwise spaces are never expansive") {
    // every finite bornology member meets the transported singleton finitely often
    for (const char* name : {"sys_a.json", "sys_c.json", "sys_h.json"}) {
        const auto sys = load_fixture(name);
        for (SpaceKind sp : {SpaceKind::CompactConvergence, SpaceKind::PointwiseConvergence}) {
            const auto v = analyze_cfs(sys, sp, Notion::Expansive, 100);
            CHECK(v.status == Status::ProvenFalse);
            CHECK(analyze_cfs(sys, sp, Notion::Average, 100).status == Status::ProvenFalse);
            CHECK(analyze_cfs(sys, sp, Notion::Uniform, 100).status == Status::ProvenFalse);
        }
    }
}

TEST_CASE("cycles carry expansivity on the finite-set bornologies") {
    // a growing cycle product makes B = the cycle a witness set
    AtomicSystem sys;
    sys.p = 1;
    Orbit o;
    o.kind = MapKind::Cycle;
    o.cycle_length = 2;
    o.overrides[0] = {Scalar(Rational(3)), Rational(1)};
    o.overrides[1] = {Scalar(Rational(1)), Rational(1)};
    sys.orbits.push_back(o);
    check_well_formed(sys);
    for (SpaceKind sp : {SpaceKind::CompactConvergence, SpaceKind::PointwiseConvergence,
                         SpaceKind::BoundedFunctions}) {
        CHECK(analyze_cfs(sys, sp, Notion::Expansive, 60).status == Status::ProvenTrue);
        CHECK(analyze_cfs(sys, sp, Notion::Uniform, 60).status == Status::ProvenTrue);
        CHECK(analyze_cfs(sys, sp, Notion::Positive, 60).status == Status::ProvenTrue);
    }
    // modulus-1 cycle product: bounded in every direction
    const auto flat = load_fixture("sys_f.json");
    for (SpaceKind sp : {SpaceKind::CompactConvergence, SpaceKind::BoundedFunctions})
        CHECK(analyze_cfs(flat, sp, Notion::Expansive, 60).status == Status::ProvenFalse);
}

TEST_CASE("unit weight is never expansive on any function space") {
    const auto sys = load_fixture("sys_b.json");
    for (SpaceKind sp : {SpaceKind::BoundedFunctions, SpaceKind::VanishingAtInfinity,
                         SpaceKind::CompactConvergence, SpaceKind::PointwiseConvergence})
        for (Notion n : {Notion::Expansive, Notion::Average, Notion::Uniform, Notion::Positive,
                         Notion::AveragePositive, Notion::UniformPositive})
            CHECK(analyze_cfs(sys, sp, n, 60).status == Status::ProvenFalse);
}

TEST_CASE("positive variants fail on unilateral chains in every space") {
    const auto uni = load_fixture("sys_unilateral.json");
    for (SpaceKind sp : {SpaceKind::BoundedFunctions, SpaceKind::CompactConvergence})
        for (Notion n : {Notion::Positive, Notion::AveragePositive, Notion::UniformPositive})
            CHECK(analyze_cfs(uni, sp, n, 60).status == Status::ProvenFalse);
}

TEST_CASE("a zero weight defeats the positive notions on every space") {
    auto sys = load_fixture("sys_a.json");
    sys.invertibility_claim.reset();
    sys.orbits[0].overrides[0] = {Scalar(Rational(0)), Rational(1)};
    check_well_formed(sys);
    for (SpaceKind sp : {SpaceKind::BoundedFunctions, SpaceKind::CompactConvergence})
        for (Notion n : {Notion::Positive, Notion::AveragePositive, Notion::UniformPositive}) {
            const auto v = analyze_cfs(sys, sp, n, 60);
            CHECK(v.status == Status::ProvenFalse);
        }
}

TEST_CASE("wandering window reduction: preconditions and soundness") {
    const auto sys = load_fixture("sys_a.json");
    const auto Os = wandering_window_reduction(sys, {{0, 0}});
    REQUIRE(Os.size() == 1);
    CHECK(Os[0] == AtomId{0, 0});

    const auto two = load_fixture("sys_e.json");
    CHECK(wandering_window_reduction(two, {{0, 0}, {1, 0}}).size() == 2);
    // a window that misses an orbit cannot generate a dense union of iterates
    CHECK_THROWS_AS(wandering_window_reduction(two, {{0, 0}}), OpdynError);
    // 1/w unbounded: a vanishing weight defeats the corollary's hypothesis
    const auto zw = load_fixture("negative/unilateral_zero_weight.json");
    CHECK_THROWS_AS(wandering_window_reduction(zw, {{0, 0}}), OpdynError);
}

TEST_CASE("reduced and full test families give identical statuses", "[property]") {
    SampleRng rng(888);
    for (int trial = 0; trial < 25; ++trial) {
        const auto desc = opdyn_test::random_shift_description(rng);
        const auto sys = opdyn_test::shift_system(desc, Rational(1));
        const auto W = wandering_window_reduction(sys, {{0, 0}});
        for (SpaceKind sp : {SpaceKind::VanishingAtInfinity, SpaceKind::CompactConvergence})
            for (Notion n : {Notion::Expansive, Notion::Average}) {
                const auto full = analyze_cfs(sys, sp, n, 60);
                const auto reduced = analyze_cfs(sys, sp, n, 60, W);
                CHECK(full.status == reduced.status);
            }
    }
}

TEST_CASE("reduction is limited to the plain and average notions") {
    const auto sys = load_fixture("sys_a.json");
    const std::vector<AtomId> W{{0, 0}};
    CHECK_THROWS_AS(analyze_cfs(sys, SpaceKind::VanishingAtInfinity, Notion::Uniform, 50, W),
                    OpdynError);
}

TEST_CASE("pure shifts on c0 match the closed-form criteria", "[property]") {
    SampleRng rng(5150);
    for (int trial = 0; trial < 40; ++trial) {
        const auto desc = opdyn_test::random_shift_description(rng);
        const auto crit = opdyn_test::example_shift_criteria(desc);
        const auto sys = opdyn_test::shift_system(desc, Rational(1));
        const auto space = SpaceKind::VanishingAtInfinity;
        CHECK((analyze_cfs(sys, space, Notion::Expansive, 80).status == Status::ProvenTrue) ==
              crit.expansive);
        CHECK((analyze_cfs(sys, space, Notion::Average, 80).status == Status::ProvenTrue) ==
              crit.average);
        CHECK((analyze_cfs(sys, space, Notion::Uniform, 80).status == Status::ProvenTrue) ==
              crit.uniform);
    }
}

TEST_CASE("operator-level oracle: bump iterates follow the proven verdicts") {
    // iterate C_{w,f} on indicator bumps and compare sup norms with the
    // criterion prediction over the horizon
    for (const char* name : {"sys_a.json", "sys_g.json"}) {
        const auto sys = load_fixture(name);
        const auto v = analyze_cfs(sys, SpaceKind::VanishingAtInfinity, Notion::Expansive, 60);
        SampleFunction bump;
        bump.support[{0, 0}] = Scalar::one();
        double sup_log = -1e300;
        for (std::int64_t n = -60; n <= 60; ++n) {
            if (n == 0) continue;
            const auto image = apply_operator(sys, to_typed<LogArith>(bump), n);
            for (const auto& [a, val] : image.support)
                sup_log = std::max(sup_log, val.mod.lg);
        }
        if (v.status == Status::ProvenTrue && *v.rate_data[0].lambda_plus > 0)
            CHECK(sup_log > std::log(1e6));
        if (v.status == Status::ProvenFalse) CHECK(sup_log < std::log(1e3));
    }
}
