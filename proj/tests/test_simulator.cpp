#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tspq/generator.hpp"
#include "tspq/metrics.hpp"
#include "tspq/rng.hpp"
#include "tspq/simulator.hpp"
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

SimConfig quick_cfg(const ModelParams& p, std::uint64_t seed,
                    std::uint64_t measured) {
    SimConfig cfg;
    cfg.params = p;
    cfg.seed = seed;
    cfg.warmup_events = 10000;
    cfg.measured_events = measured;
    return cfg;
}

} // namespace

TEST_CASE("splitmix stream is the documented one") {
    // Reference outputs of the splitmix64 recurrence from seed 0.
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xE220A8397B1DCDAFull);
    CHECK(rng.next() == 0x6E789E6AA1B965F4ull);
    CHECK(rng.next() == 0x06C45D188009454Full);

    SplitMix64 unit(123);
    for (int k = 0; k < 1000; ++k) {
        double u = unit.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }

    SplitMix64 expo(9);
    for (int k = 0; k < 1000; ++k) CHECK(expo.next_exponential(2.0) > 0.0);
}

TEST_CASE("simulate_run validates its configuration") {
    SimConfig cfg = quick_cfg(canonical(20), 1, 1000);
    cfg.batches = 1;
    CHECK_THROWS_AS(simulate_run(cfg), InvalidConfig);
    cfg.batches = 20;
    cfg.measured_events = 10;
    CHECK_THROWS_AS(simulate_run(cfg), InvalidConfig);
}

TEST_CASE("identical seeds give identical estimates") {
    SimConfig cfg = quick_cfg(canonical(20), 42, 100000);
    SimEstimate a = simulate_run(cfg);
    SimEstimate b = simulate_run(cfg);

    auto same = [](const MetricEstimate& x, const MetricEstimate& y) {
        return x.point == y.point && x.half_width == y.half_width;
    };
    CHECK(same(a.rt_loss_fraction, b.rt_loss_fraction));
    CHECK(same(a.mean_rt_in_queue, b.mean_rt_in_queue));
    CHECK(same(a.mean_nrt_in_queue, b.mean_nrt_in_queue));
    CHECK(same(a.accepted_nrt_rate, b.accepted_nrt_rate));
    CHECK(same(a.mean_rt_sojourn, b.mean_rt_sojourn));
    CHECK(same(a.mean_nrt_sojourn, b.mean_nrt_sojourn));
    CHECK(a.rt_arrivals == b.rt_arrivals);
    CHECK(a.nrt_admissions == b.nrt_admissions);
    CHECK(a.measured_time == b.measured_time);
    CHECK(a.occupancy_time == b.occupancy_time);
    CHECK(a.admissions_by_occupancy == b.admissions_by_occupancy);

    SimConfig other = cfg;
    other.seed = 43;
    SimEstimate c = simulate_run(other);
    CHECK(a.measured_time != c.measured_time);
}

TEST_CASE("no NRT traffic means no NRT activity") {
    SimEstimate est = simulate_run(quick_cfg(canonical(0), 5, 50000));
    CHECK(est.nrt_admissions == 0);
    CHECK(est.nrt_throttle_drops == 0);
    CHECK(est.nrt_departures == 0);
    CHECK(est.mean_nrt_in_queue.point == 0.0);
    CHECK(est.mean_nrt_sojourn.point == 0.0);
    CHECK(est.accepted_nrt_rate.point == 0.0);
}

TEST_CASE("estimates are sane and admitted packets are conserved") {
    SimEstimate est = simulate_run(quick_cfg(canonical(20), 11, 200000));

    CHECK(est.rt_losses <= est.rt_arrivals);
    for (const MetricEstimate* m :
         {&est.rt_loss_fraction, &est.mean_rt_in_queue, &est.mean_nrt_in_queue,
          &est.accepted_nrt_rate, &est.mean_rt_sojourn, &est.mean_nrt_sojourn}) {
        CHECK(m->point >= 0.0);
        CHECK(m->half_width >= 0.0);
    }
    CHECK(est.measured_time > 0.0);

    // Everything admitted either departed or is still in the buffer; the
    // capacity split makes post-admission NRT loss impossible.
    CHECK(est.nrt_in_queue_start + est.nrt_admissions ==
          est.nrt_departures + est.nrt_in_queue_end);

    double total_time = 0.0;
    for (double t : est.occupancy_time) total_time += t;
    CHECK(total_time == Catch::Approx(est.measured_time));
}

TEST_CASE("thinned admissions run at the state-dependent rate") {
    ModelParams p = canonical(20);
    SimEstimate est = simulate_run(quick_cfg(p, 3, 1000000));

    StateSpace space(p);
    std::vector<double> exposure(p.capacity_n + 1, 0.0);
    for (int idx = 0; idx < space.size(); ++idx) {
        State s = space.state_of(idx);
        exposure[s.rt_count + s.nrt_count] += est.occupancy_time[idx];
    }

    int checked = 0;
    double z_sum = 0.0;
    for (int k = 0; k <= p.capacity_n; ++k) {
        double expected = arrival_rate_nrt(p, k) * exposure[k];
        if (expected < 50.0) continue;
        double z = (double(est.admissions_by_occupancy[k]) - expected) /
                   std::sqrt(expected);
        CHECK(std::abs(z) <= 4.0);
        z_sum += std::abs(z);
        ++checked;
    }
    REQUIRE(checked > 10);
    CHECK(z_sum / checked <= 1.5);
}

TEST_CASE("simulation agrees with the solved model") {
    ModelParams p = canonical(20);
    SimConfig cfg = quick_cfg(p, 2024, 1000000);
    SimEstimate est = simulate_run(cfg);

    StationaryDistribution dist = solve_stationary_direct(build_generator(p));
    QoSReport report = make_qos_report(dist, p);
    ComparisonVerdict verdict = compare_to_analytic(est, report, p);

    REQUIRE(verdict.lines.size() == 5);
    for (const ComparisonLine& line : verdict.lines) {
        INFO(line.metric << " analytic=" << line.analytic << " sim=" << line.sim_point
                         << " hw=" << line.half_width);
        CHECK(line.pass);
    }
    CHECK(verdict.all_pass);
    CHECK((verdict.closer_nrt_formula == "d_nrt_paper" ||
           verdict.closer_nrt_formula == "d_nrt_little"));
}

TEST_CASE("comparison catches a mis-modelled service rate") {
    // Lighter RT load than the usual instance: with the RT server often
    // idle the NRT throughput is large and tightly estimated, so a 10%
    // service-rate error stands far outside the confidence band.
    ModelParams truth = canonical(20);
    truth.lambda_rt = 15;
    truth = validate_params(truth);
    ModelParams perturbed = truth;
    perturbed.mu_nrt *= 1.1;
    perturbed = validate_params(perturbed);

    SimEstimate est = simulate_run(quick_cfg(perturbed, 8, 400000));
    StationaryDistribution dist = solve_stationary_direct(build_generator(truth));
    QoSReport report = make_qos_report(dist, truth); // deliberately stale
    ComparisonVerdict verdict = compare_to_analytic(est, report, perturbed);
    CHECK_FALSE(verdict.all_pass);

    bool nrt_rate_flagged = false;
    for (const ComparisonLine& line : verdict.lines)
        if (!line.pass && line.metric == "accepted_nrt_rate") nrt_rate_flagged = true;
    CHECK(nrt_rate_flagged);
}

TEST_CASE("comparison refuses estimates from a different model") {
    ModelParams p = canonical(20);
    SimEstimate est = simulate_run(quick_cfg(p, 1, 20000));
    StationaryDistribution dist = solve_stationary_direct(build_generator(p));
    QoSReport report = make_qos_report(dist, p);

    ModelParams other = canonical(15);
    CHECK_THROWS_AS(compare_to_analytic(est, report, other), ParamMismatch);
}

TEST_CASE("t quantile table and tail expansion") {
    CHECK(detail::t_quantile_975(1) == Catch::Approx(12.706205).margin(1e-5));
    CHECK(detail::t_quantile_975(10) == Catch::Approx(2.228139).margin(1e-5));
    CHECK(detail::t_quantile_975(19) == Catch::Approx(2.093024).margin(1e-5));
    CHECK(detail::t_quantile_975(30) == Catch::Approx(2.042272).margin(1e-5));
    CHECK(detail::t_quantile_975(100) == Catch::Approx(1.983972).margin(2e-3));
    CHECK(detail::t_quantile_975(1000000) == Catch::Approx(1.959964).margin(1e-4));
}
