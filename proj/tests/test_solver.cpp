#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "dense_oracle.hpp"
#include "tspq/generator.hpp"
#include "tspq/metrics.hpp"
#include "tspq/solver.hpp"

using namespace tspq;

namespace {

ModelParams canonical(double lambda_nrt, FeedbackPolicy f = FeedbackPolicy::linear()) {
    ModelParams p;
    p.capacity_n = 100, p.threshold_r = 30, p.threshold_l = 50;
    p.lambda_rt = 30, p.lambda_nrt = lambda_nrt, p.mu_rt = 30, p.mu_nrt = 35;
    p.feedback = f;
    return validate_params(p);
}

ModelParams tiny() {
    ModelParams p;
    p.capacity_n = 4, p.threshold_r = 1, p.threshold_l = 2;
    p.lambda_rt = 1, p.lambda_nrt = 1, p.mu_rt = 2, p.mu_nrt = 3;
    return validate_params(p);
}

// Stationary distribution of the tiny instance, solved independently and
// pinned here. Row-major over {0,1} x {0..3}.
constexpr double kTinyPi[8] = {
    0.37939110070257609,  0.1686182669789226,   0.088992974238875797,
    0.029664324746292072, 0.12646370023419201,  0.098360655737704916,
    0.093676814988290419, 0.014832162373146012,
};

} // namespace

TEST_CASE("kahan_sum compensates accumulation error") {
    std::vector<double> xs(10000, 0.1);
    CHECK(std::abs(kahan_sum(xs) - 1000.0) <= 1e-12);
    CHECK(kahan_sum({}) == 0.0);
}

TEST_CASE("reachable_from covers the whole lattice when NRT flows") {
    RateMatrix gen = build_generator(canonical(20));
    std::vector<int> reach = reachable_from(gen, 0);
    REQUIRE(int(reach.size()) == gen.dim);
    for (int s = 0; s < gen.dim; ++s) CHECK(reach[s] == s);
}

TEST_CASE("direct solve on the tiny instance matches the pinned distribution") {
    StationaryDistribution dist = solve_stationary_direct(build_generator(tiny()));
    REQUIRE(dist.probabilities.size() == 8);
    CHECK(dist.method == SolveMethod::DirectElimination);
    for (int s = 0; s < 8; ++s)
        CHECK(dist.probabilities[s] == Catch::Approx(kTinyPi[s]).margin(1e-9));
    CHECK(dist.residual_inf <= 1e-12);
}

TEST_CASE("direct solve agrees with a dense null-space oracle") {
    RateMatrix gen = build_generator(tiny());
    StationaryDistribution dist = solve_stationary_direct(gen);
    std::vector<double> oracle = tspq_test::dense_stationary(gen);
    for (int s = 0; s < gen.dim; ++s)
        CHECK(std::abs(dist.probabilities[s] - oracle[s]) <= 1e-12);
}

TEST_CASE("direct solve on a mid-size instance matches the dense oracle") {
    ModelParams p;
    p.capacity_n = 20, p.threshold_r = 3, p.threshold_l = 8;
    p.lambda_rt = 2.5, p.lambda_nrt = 4, p.mu_rt = 3, p.mu_nrt = 3.5;
    p.feedback = FeedbackPolicy::constant_fraction(0.4);
    p = validate_params(p);
    RateMatrix gen = build_generator(p);
    StationaryDistribution dist = solve_stationary_direct(gen);
    std::vector<double> oracle = tspq_test::dense_stationary(gen);
    for (int s = 0; s < gen.dim; ++s)
        CHECK(std::abs(dist.probabilities[s] - oracle[s]) <= 1e-12);
}

TEST_CASE("direct solve satisfies stationarity on the canonical models") {
    for (double lambda_nrt : {5.0, 20.0}) {
        for (FeedbackPolicy f :
             {FeedbackPolicy::linear(), FeedbackPolicy::constant_fraction(0.5)}) {
            StationaryDistribution dist =
                solve_stationary_direct(build_generator(canonical(lambda_nrt, f)));
            CHECK(dist.residual_inf <= 1e-10);
            double sum = kahan_sum(dist.probabilities);
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            for (double p : dist.probabilities) CHECK(p >= 0.0);
        }
    }
}

TEST_CASE("iterative solve agrees with the direct one") {
    RateMatrix gen = build_generator(canonical(20));
    StationaryDistribution direct = solve_stationary_direct(gen);
    StationaryDistribution iter = solve_stationary_iterative(gen);
    CHECK(iter.method == SolveMethod::UniformizationPower);
    CHECK(iter.iterations > 0);
    double max_diff = 0.0;
    for (int s = 0; s < gen.dim; ++s)
        max_diff = std::max(max_diff,
                            std::abs(direct.probabilities[s] - iter.probabilities[s]));
    CHECK(max_diff <= 1e-8);
}

TEST_CASE("iterative solve reports non-convergence with its last iterate") {
    RateMatrix gen = build_generator(canonical(20));
    try {
        solve_stationary_iterative(gen, 1e-12, 5);
        FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
        CHECK(e.kind() == ErrorKind::Solve);
        REQUIRE(int(e.last_iterate.probabilities.size()) == gen.dim);
        CHECK(std::abs(kahan_sum(e.last_iterate.probabilities) - 1.0) <= 1e-12);
        CHECK(e.last_iterate.iterations == 5);
    }
}

TEST_CASE("a zero NRT rate confines mass to the RT axis") {
    ModelParams p = canonical(0);
    RateMatrix gen = build_generator(p);

    std::vector<int> reach = reachable_from(gen, 0);
    StateSpace space(p);
    std::vector<int> rt_axis;
    for (int s = 0; s < gen.dim; ++s)
        if (space.state_of(s).nrt_count == 0) rt_axis.push_back(s);
    CHECK(reach == rt_axis);

    for (StationaryDistribution dist : {solve_stationary_direct(gen),
                                        solve_stationary_iterative(gen)}) {
        std::vector<double> marginal = rt_marginal_oracle(p.threshold_r, p.lambda_rt,
                                                          p.mu_rt);
        for (int s = 0; s < gen.dim; ++s) {
            State st = space.state_of(s);
            if (st.nrt_count != 0)
                CHECK(dist.probabilities[s] == 0.0); // unreachable, exactly zero
            else
                CHECK(std::abs(dist.probabilities[s] - marginal[st.rt_count]) <= 1e-10);
        }
    }
}

TEST_CASE("residual_inf matches an independent evaluation") {
    RateMatrix gen = build_generator(canonical(15));
    StationaryDistribution dist = solve_stationary_direct(gen);
    CHECK(residual_inf_norm(gen, dist) == dist.residual_inf);

    StationaryDistribution wrong = dist;
    wrong.probabilities.pop_back();
    CHECK_THROWS_AS(residual_inf_norm(gen, wrong), DimensionMismatch);
}
