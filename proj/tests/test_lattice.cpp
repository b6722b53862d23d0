#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dle/checks.hpp"
#include "dle/lattice.hpp"
#include "reference_matrices.hpp"
#include "support.hpp"

#include <nlohmann/json.hpp>

using namespace dle;
using dletest::fixture;
using dletest::mat;
using dletest::vec;
namespace ref = dletest::ref;

TEST_CASE("edge weights of the split model") {
    CHECK(edge_weight(EdgeKind::InteriorTimelike) == -2.0);
    CHECK(edge_weight(EdgeKind::BoundarySpacelike) == 0.5);
    CHECK(edge_weight(EdgeKind::InteriorSpacelike) == 1.0);
    CHECK(edge_weight(EdgeKind::BoundaryTimelike) == -1.0);
}

TEST_CASE("ring lattice reproduces the reference dynamical matrix") {
    const LatticeSpec spec = load_lattice(fixture("tube_3_3.json"));
    CHECK(spec.q() == 3);
    CHECK(spec.num_slices() == 2);
    const DynamicalMatrix dyn = build_dynamical_matrix(spec);
    CHECK(max_abs(dyn.k - ref::ring_k()) < 1e-12);
}

TEST_CASE("collapse lattice zeroes the rows of its virtual vertices") {
    const LatticeSpec spec = load_lattice(fixture("tube_3_1.json"));
    const DynamicalMatrix dyn = build_dynamical_matrix(spec);
    CHECK(dyn.k(4, 4) == -6.0);
    CHECK(max_abs(dyn.k.row(3)) == 0.0);
    CHECK(max_abs(dyn.k.row(5)) == 0.0);
    CHECK(max_abs(dyn.k.col(3)) == 0.0);
    CHECK(max_abs(dyn.k.col(5)) == 0.0);
    CHECK(max_abs(dyn.k.rowwise().sum()) < 1e-12);
}

TEST_CASE("doubled-pair lattice sums repeated edges") {
    const LatticeSpec spec = load_lattice(fixture("tube_2_2_doubled.json"));
    const DynamicalMatrix dyn = build_dynamical_matrix(spec);
    CHECK(max_abs(dyn.k - ref::doubled_pair_k()) < 1e-12);
}

TEST_CASE("single slice without edges gives a zero matrix") {
    const LatticeSpec spec({{LatticeVertex{1, false}, LatticeVertex{2, false}}}, {}, {});
    const DynamicalMatrix dyn = build_dynamical_matrix(spec);
    CHECK(dyn.k.rows() == 2);
    CHECK(max_abs(dyn.k) == 0.0);
    CHECK_THROWS_AS(split_into_steps(spec), ValidationError);
}

TEST_CASE("splitting the one-step fixtures yields the reference systems") {
    struct Case {
        const char* file;
        TimeStepSystem expected;
    };
    const Case cases[] = {
        {"tube_3_3.json", ref::ring_step()},
        {"tube_3_1.json", ref::collapse_step()},
        {"tube_1_3.json", ref::expand_step()},
        {"tube_2_2_doubled.json", ref::doubled_pair_step()},
    };
    for (const Case& c : cases) {
        const auto steps = split_into_steps(load_lattice(fixture(c.file)));
        REQUIRE(steps.size() == 1);
        CHECK(max_abs(steps[0].l() - c.expected.l()) < 1e-12);
        CHECK(max_abs(steps[0].r() - c.expected.r()) < 1e-12);
        CHECK(max_abs(steps[0].rbar() - c.expected.rbar()) < 1e-12);
    }
}

TEST_CASE("the narrowing tube stacks the three one-step models") {
    const auto steps = split_into_steps(load_lattice(fixture("tube_3_3_1_3.json")));
    REQUIRE(steps.size() == 3);
    CHECK(max_abs(steps[0].l() - ref::ring_step().l()) < 1e-12);
    CHECK(max_abs(steps[0].r() - ref::ring_step().r()) < 1e-12);
    CHECK(max_abs(steps[1].l() - ref::collapse_step().l()) < 1e-12);
    CHECK(max_abs(steps[1].r() - ref::collapse_step().r()) < 1e-12);
    CHECK(max_abs(steps[1].rbar() - ref::collapse_step().rbar()) < 1e-12);
    CHECK(max_abs(steps[2].l() - ref::expand_step().l()) < 1e-12);
    CHECK(max_abs(steps[2].r() - ref::expand_step().r()) < 1e-12);
    CHECK(max_abs(steps[2].rbar() - ref::expand_step().rbar()) < 1e-12);
}

TEST_CASE("the widening tube starts with the expand model") {
    const auto steps = split_into_steps(load_lattice(fixture("tube_1_3_3_1.json")));
    REQUIRE(steps.size() == 3);
    CHECK(max_abs(steps[0].l() - ref::expand_step().l()) < 1e-12);
    CHECK(max_abs(steps[0].r() - ref::expand_step().r()) < 1e-12);
    CHECK(max_abs(steps[1].l() - ref::ring_step().l()) < 1e-12);
    CHECK(max_abs(steps[2].r() - ref::collapse_step().r()) < 1e-12);
}

TEST_CASE("interior spacelike edges accumulate the interior weight") {
    // Two stacked ring steps share the middle slice; its loop edges are
    // counted once per adjacent step.
    const LatticeSpec spec = parse_lattice(nlohmann::json::parse(R"({
        "slices": [[1,2,3],[4,5,6],[7,8,9]],
        "spacelike": [[0,1,2],[0,2,3],[0,3,1],
                      [1,4,5],[1,5,6],[1,6,4],
                      [2,7,8],[2,8,9],[2,9,7]],
        "timelike": [[0,1,4],[0,2,4],[0,2,5],[0,3,5],[0,3,6],[0,1,6],
                     [1,4,7],[1,5,7],[1,5,8],[1,6,8],[1,6,9],[1,4,9]]
    })"));
    const DynamicalMatrix dyn = build_dynamical_matrix(spec);
    CHECK(dyn.k(3, 4) == -1.0);   // interior spacelike edge weight 1
    CHECK(dyn.k(0, 1) == -0.5);   // boundary spacelike edge weight 1/2
    CHECK(dyn.k(3, 3) == -6.0);   // 2 interior spacelike + 4 timelike
    CHECK(max_abs(dyn.k.rowwise().sum()) < 1e-12);
}

TEST_CASE("total action matches the quadratic form") {
    const LatticeSpec spec = load_lattice(fixture("tube_3_3.json"));
    const DynamicalMatrix dyn = build_dynamical_matrix(spec);
    CHECK(total_action(spec, Vector::Zero(6)) == 0.0);
    CHECK(total_action(spec, Vector::Constant(6, 3.25)) == doctest::Approx(0.0));

    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector phi = random_vector(rng, 6);
        CHECK(total_action(spec, phi) ==
              doctest::Approx(0.5 * phi.dot(dyn.k * phi)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(total_action(spec, Vector::Zero(5)), ValidationError);
}

TEST_CASE("step actions add up to the total action") {
    for (const char* file : {"tube_3_3_1_3.json", "tube_1_3_3_1.json"}) {
        const LatticeSpec spec = load_lattice(fixture(file));
        const auto steps = split_into_steps(spec);
        Rng rng(29);
        for (int trial = 0; trial < 5; ++trial) {
            const Vector phi = random_vector(rng, spec.total_vertices());
            double summed = 0.0;
            for (std::size_t n = 0; n < steps.size(); ++n) {
                summed += step_action(steps[n], phi.segment(n * spec.q(), spec.q()),
                                      phi.segment((n + 1) * spec.q(), spec.q()));
            }
            CHECK(summed == doctest::Approx(total_action(spec, phi)).epsilon(1e-12));
        }
    }
}

TEST_CASE("document parsing rejects malformed input") {
    using nlohmann::json;
    CHECK_THROWS_WITH_AS(parse_lattice(json::parse(R"({"slices": [[1]], "extra": 1})")),
                         doctest::Contains("unknown key \"extra\""), ValidationError);
    CHECK_THROWS_AS(parse_lattice(json::parse(R"({"slices": [[1, 1]]})")), ValidationError);
    CHECK_THROWS_AS(parse_lattice(json::parse(R"({"slices": [[0]]})")), ValidationError);
    CHECK_THROWS_AS(parse_lattice(json::parse(R"({"slices": [[1, 2]],
        "spacelike": [[0, 1, 1]]})")),
                    ValidationError);
    // Edges touching virtual vertices are invalid.
    CHECK_THROWS_AS(parse_lattice(json::parse(R"({"slices":
        [[{"id": 1, "virtual": true}, 2]], "spacelike": [[0, 1, 2]]})")),
                    ValidationError);
    // Timelike edges must join adjacent slices with matching endpoints.
    CHECK_THROWS_AS(parse_lattice(json::parse(R"({"slices": [[1], [2]],
        "timelike": [[0, 2, 1]]})")),
                    ValidationError);
    CHECK_THROWS_AS(parse_lattice(json::parse(R"({"slices": [[1], [2]],
        "timelike": [[1, 2, 1]]})")),
                    ValidationError);
    CHECK_THROWS_AS(parse_lattice(json::parse(R"([1, 2])")), ValidationError);
}

TEST_CASE("slices of unequal length are padded with virtual vertices") {
    const LatticeSpec spec = parse_lattice(nlohmann::json::parse(R"({
        "slices": [[1, 2, 3], [4]],
        "spacelike": [[0, 1, 2], [0, 2, 3], [0, 3, 1]],
        "timelike": [[0, 1, 4], [0, 2, 4], [0, 3, 4]]
    })"));
    CHECK(spec.q() == 3);
    CHECK(spec.slices()[1].size() == 3);
    CHECK(spec.slices()[1][1].is_virtual);
    CHECK(spec.slices()[1][2].is_virtual);
    const DynamicalMatrix dyn = build_dynamical_matrix(spec);
    CHECK(dyn.k(3, 3) == -6.0);
    CHECK(max_abs(dyn.k.row(4)) == 0.0);
    CHECK(max_abs(dyn.k.row(5)) == 0.0);
}

TEST_CASE("lattice property suite on random tubes") {
    const CheckSummary summary = run_random_lattice_checks(777, 50);
    for (const CheckResult& result : summary.results) {
        INFO(result.name, " worst=", result.worst, " tol=", result.tolerance);
        CHECK(result.pass);
    }
}
