#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "tspq/errors.hpp"
#include "tspq/metrics.hpp"
#include "tspq/model.hpp"
#include "tspq/rng.hpp"

namespace tspq {

struct SimConfig {
    ModelParams params;
    std::uint64_t seed = 1;
    std::uint64_t warmup_events = 100000;
    std::uint64_t measured_events = 10000000;
    int batches = 20;
};

/// Point estimate with a 95% batch-means confidence half-width.
struct MetricEstimate {
    double point = 0.0;
    double half_width = 0.0;
};

struct SimEstimate {
    ModelParams params;

    MetricEstimate rt_loss_fraction;
    MetricEstimate mean_rt_in_queue;
    MetricEstimate mean_nrt_in_queue;
    MetricEstimate accepted_nrt_rate;
    MetricEstimate mean_rt_sojourn;  // admission to service completion
    MetricEstimate mean_nrt_sojourn; // admission to service completion

    std::uint64_t rt_arrivals = 0;
    std::uint64_t rt_losses = 0;
    std::uint64_t nrt_admissions = 0;
    std::uint64_t nrt_throttle_drops = 0;
    std::uint64_t nrt_departures = 0;
    std::uint64_t nrt_in_queue_start = 0;
    std::uint64_t nrt_in_queue_end = 0;

    double measured_time = 0.0;
    /// Time spent in each state (row-major index) during the measured window.
    std::vector<double> occupancy_time;
    /// Admitted-NRT counts keyed by the total occupancy seen at admission.
    std::vector<std::uint64_t> admissions_by_occupancy;
};

namespace detail {

/// Two-sided 97.5% Student-t quantile. Exact table through 30 degrees of
/// freedom, Cornish-Fisher expansion beyond (error < 2e-4 there).
inline double t_quantile_975(int dof) {
    static const double table[31] = {
        0.0,      12.706205, 4.302653, 3.182446, 2.776445, 2.570582,
        2.446912, 2.364624,  2.306004, 2.262157, 2.228139, 2.200985,
        2.178813, 2.160369,  2.144787, 2.131450, 2.119905, 2.109816,
        2.100922, 2.093024,  2.085963, 2.079614, 2.073873, 2.068658,
        2.063899, 2.059539,  2.055529, 2.051831, 2.048407, 2.045230,
        2.042272};
    if (dof <= 0) return 0.0;
    if (dof <= 30) return table[dof];
    const double z = 1.959963985;
    const double z3 = z * z * z, z5 = z3 * z * z;
    double nu = double(dof);
    return z + (z3 + z) / (4.0 * nu) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * nu * nu);
}

/// Batch-means half-width over the batches that produced a value.
inline double batch_half_width(const std::vector<double>& batch_values) {
    int m = int(batch_values.size());
    if (m < 2) return 0.0;
    double mean = 0.0;
    for (double v : batch_values) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : batch_values) ss += (v - mean) * (v - mean);
    double stderr_mean = std::sqrt(ss / (double(m) * double(m - 1)));
    return t_quantile_975(m - 1) * stderr_mean;
}

} // namespace detail

/// Event-driven simulation of the buffer.
///
/// NRT arrivals are a rate-lambda_nrt Poisson stream thinned at the door:
/// a candidate seeing total occupancy k is admitted with probability
/// arrival_rate_nrt(k) / lambda_nrt, which reproduces the state-dependent
/// admission rate exactly. RT packets are served exhaustively before any
/// NRT packet. Queue lengths are time-weighted averages, sojourns are
/// per-packet tallies of departures inside the measured window, and
/// confidence intervals come from batch means over that window.
inline SimEstimate simulate_run(const SimConfig& cfg) {
    if (cfg.batches < 2)
        throw InvalidConfig("batches must be at least 2");
    if (cfg.measured_events < std::uint64_t(cfg.batches))
        throw InvalidConfig("measured_events must be at least the batch count");
    const ModelParams p = validate_params(cfg.params);
    StateSpace space(p);

    SplitMix64 rng(cfg.seed);
    const double lam = p.lambda_rt, lam1 = p.lambda_nrt;
    const double mu = p.mu_rt, mu1 = p.mu_nrt;
    const std::uint64_t total_events = cfg.warmup_events + cfg.measured_events;
    const int nbatches = cfg.batches;

    int i = 0, j = 0;
    double now = 0.0;
    std::deque<double> rt_queue, nrt_queue; // admission timestamps

    SimEstimate est;
    est.params = p;
    est.occupancy_time.assign(space.size(), 0.0);
    est.admissions_by_occupancy.assign(p.capacity_n + 1, 0);

    struct Accum {
        double duration = 0.0, area_rt = 0.0, area_nrt = 0.0;
        std::uint64_t rt_arrivals = 0, rt_losses = 0, admissions = 0;
        double rt_sojourn_sum = 0.0, nrt_sojourn_sum = 0.0;
        std::uint64_t rt_departures = 0, nrt_departures = 0;
    };
    Accum window;
    std::vector<Accum> batch(nbatches);

    for (std::uint64_t ev = 0; ev < total_events; ++ev) {
        double rates[4];
        int kinds[4]; // 0 rt-arrival, 1 nrt-candidate, 2 rt-service, 3 nrt-service
        int nactive = 0;
        rates[nactive] = lam, kinds[nactive] = 0, ++nactive;
        if (lam1 > 0.0) rates[nactive] = lam1, kinds[nactive] = 1, ++nactive;
        if (i > 0) rates[nactive] = mu, kinds[nactive] = 2, ++nactive;
        if (i == 0 && j > 0) rates[nactive] = mu1, kinds[nactive] = 3, ++nactive;
        double total = 0.0;
        for (int c = 0; c < nactive; ++c) total += rates[c];

        double dt = rng.next_exponential(total);
        now += dt;

        const bool measuring = ev >= cfg.warmup_events;
        Accum* b = nullptr;
        if (measuring) {
            if (ev == cfg.warmup_events) est.nrt_in_queue_start = std::uint64_t(j);
            std::uint64_t me = ev - cfg.warmup_events;
            b = &batch[std::size_t(me * std::uint64_t(nbatches) / cfg.measured_events)];
            window.duration += dt;
            window.area_rt += i * dt;
            window.area_nrt += j * dt;
            b->duration += dt;
            b->area_rt += i * dt;
            b->area_nrt += j * dt;
            est.occupancy_time[std::size_t(i) * (p.threshold_h + 1) + j] += dt;
        }

        double x = rng.next_unit() * total;
        int kind = kinds[nactive - 1];
        double cum = 0.0;
        for (int c = 0; c < nactive; ++c) {
            cum += rates[c];
            if (x < cum) {
                kind = kinds[c];
                break;
            }
        }

        switch (kind) {
        case 0: // RT arrival
            if (measuring) ++window.rt_arrivals, ++b->rt_arrivals;
            if (i < p.threshold_r) {
                ++i;
                rt_queue.push_back(now);
            } else if (measuring) {
                ++window.rt_losses, ++b->rt_losses;
            }
            break;
        case 1: { // NRT candidate, thinned by the state-dependent rate
            int k = i + j;
            double admit_prob = arrival_rate_nrt(p, k) / lam1;
            if (rng.next_unit() < admit_prob) {
                ++j;
                nrt_queue.push_back(now);
                if (measuring) {
                    ++window.admissions, ++b->admissions;
                    ++est.admissions_by_occupancy[k];
                }
            } else if (measuring) {
                ++est.nrt_throttle_drops;
            }
            break;
        }
        case 2: // RT service completion
            --i;
            if (measuring) {
                window.rt_sojourn_sum += now - rt_queue.front();
                b->rt_sojourn_sum += now - rt_queue.front();
                ++window.rt_departures, ++b->rt_departures;
            }
            rt_queue.pop_front();
            break;
        case 3: // NRT service completion
            --j;
            if (measuring) {
                window.nrt_sojourn_sum += now - nrt_queue.front();
                b->nrt_sojourn_sum += now - nrt_queue.front();
                ++window.nrt_departures, ++b->nrt_departures;
            }
            nrt_queue.pop_front();
            break;
        }
    }

    est.rt_arrivals = window.rt_arrivals;
    est.rt_losses = window.rt_losses;
    est.nrt_admissions = window.admissions;
    est.nrt_departures = window.nrt_departures;
    est.nrt_in_queue_end = std::uint64_t(j);
    est.measured_time = window.duration;

    auto estimate = [&](auto point_of, auto batch_value_of) {
        MetricEstimate m;
        m.point = point_of(window);
        std::vector<double> values;
        values.reserve(nbatches);
        for (const Accum& a : batch) {
            double v;
            if (batch_value_of(a, v)) values.push_back(v);
        }
        m.half_width = detail::batch_half_width(values);
        return m;
    };

    est.rt_loss_fraction = estimate(
        [](const Accum& a) { return a.rt_arrivals ? double(a.rt_losses) / double(a.rt_arrivals) : 0.0; },
        [](const Accum& a, double& v) {
            if (!a.rt_arrivals) return false;
            v = double(a.rt_losses) / double(a.rt_arrivals);
            return true;
        });
    est.mean_rt_in_queue = estimate(
        [](const Accum& a) { return a.duration > 0 ? a.area_rt / a.duration : 0.0; },
        [](const Accum& a, double& v) {
            if (!(a.duration > 0)) return false;
            v = a.area_rt / a.duration;
            return true;
        });
    est.mean_nrt_in_queue = estimate(
        [](const Accum& a) { return a.duration > 0 ? a.area_nrt / a.duration : 0.0; },
        [](const Accum& a, double& v) {
            if (!(a.duration > 0)) return false;
            v = a.area_nrt / a.duration;
            return true;
        });
    est.accepted_nrt_rate = estimate(
        [](const Accum& a) { return a.duration > 0 ? double(a.admissions) / a.duration : 0.0; },
        [](const Accum& a, double& v) {
            if (!(a.duration > 0)) return false;
            v = double(a.admissions) / a.duration;
            return true;
        });
    est.mean_rt_sojourn = estimate(
        [](const Accum& a) { return a.rt_departures ? a.rt_sojourn_sum / double(a.rt_departures) : 0.0; },
        [](const Accum& a, double& v) {
            if (!a.rt_departures) return false;
            v = a.rt_sojourn_sum / double(a.rt_departures);
            return true;
        });
    est.mean_nrt_sojourn = estimate(
        [](const Accum& a) { return a.nrt_departures ? a.nrt_sojourn_sum / double(a.nrt_departures) : 0.0; },
        [](const Accum& a, double& v) {
            if (!a.nrt_departures) return false;
            v = a.nrt_sojourn_sum / double(a.nrt_departures);
            return true;
        });

    return est;
}

struct ComparisonLine {
    std::string metric;
    double analytic = 0.0;
    double sim_point = 0.0;
    double half_width = 0.0;
    bool pass = false;
};

struct ComparisonVerdict {
    std::vector<ComparisonLine> lines;
    bool all_pass = true;
    double measured_nrt_sojourn = 0.0;
    double d_nrt_paper = 0.0;
    double d_nrt_little = 0.0;
    /// Which analytic NRT-delay figure lies closer to the measured sojourn.
    std::string closer_nrt_formula;
};

/// Checks each simulated metric against its analytic value at three
/// confidence half-widths, and reports which NRT delay formula the
/// measurement favors.
inline ComparisonVerdict compare_to_analytic(const SimEstimate& est,
                                             const QoSReport& report,
                                             const ModelParams& analytic_params) {
    if (!(est.params == analytic_params))
        throw ParamMismatch("simulation and analytic model parameters differ");

    ComparisonVerdict v;
    auto add = [&](const char* name, double analytic, const MetricEstimate& m) {
        bool pass = std::abs(analytic - m.point) <= 3.0 * m.half_width;
        v.lines.push_back({name, analytic, m.point, m.half_width, pass});
        v.all_pass = v.all_pass && pass;
    };
    add("rt_loss_fraction", report.p_lrt, est.rt_loss_fraction);
    add("mean_rt_in_queue", report.n_rt, est.mean_rt_in_queue);
    add("mean_nrt_in_queue", report.n_nrt, est.mean_nrt_in_queue);
    add("accepted_nrt_rate", report.lambda_eff_nrt, est.accepted_nrt_rate);
    add("mean_rt_sojourn", report.d_rt, est.mean_rt_sojourn);

    v.measured_nrt_sojourn = est.mean_nrt_sojourn.point;
    v.d_nrt_paper = report.d_nrt_paper;
    v.d_nrt_little = report.d_nrt_little;
    v.closer_nrt_formula =
        std::abs(report.d_nrt_paper - v.measured_nrt_sojourn) <
                std::abs(report.d_nrt_little - v.measured_nrt_sojourn)
            ? "d_nrt_paper"
            : "d_nrt_little";
    return v;
}

} // namespace tspq
