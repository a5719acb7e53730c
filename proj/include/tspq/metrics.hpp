#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "tspq/model.hpp"
#include "tspq/solver.hpp"

namespace tspq {

/// The stationary QoS metrics of one solved model. Two NRT delay figures
/// are always carried: d_nrt_paper divides the combined RT+NRT backlog by
/// the accepted NRT rate, d_nrt_little is the strict Little's-law sojourn
/// N_NRT / lambda_eff.
struct QoSReport {
    double p_lrt = 0.0;
    double n_rt = 0.0;
    double n_nrt = 0.0;
    double d_rt = 0.0;
    double d_nrt_paper = 0.0;
    double d_nrt_little = 0.0;
    double lambda_eff_nrt = 0.0;
};

namespace detail {

inline void require_same_dim(const StationaryDistribution& dist,
                             const ModelParams& params) {
    StateSpace space(params);
    if (int(dist.probabilities.size()) != space.size())
        throw DimensionMismatch("distribution has " +
                                std::to_string(dist.probabilities.size()) +
                                " components, state space has " +
                                std::to_string(space.size()));
}

} // namespace detail

/// Long-run fraction of RT arrivals rejected: sum of p(R, j) over j.
inline double loss_probability_rt(const StationaryDistribution& dist,
                                  const ModelParams& params) {
    detail::require_same_dim(dist, params);
    const int H = params.threshold_h;
    double sum = 0.0;
    for (int j = 0; j <= H; ++j)
        sum += dist.probabilities[params.threshold_r * (H + 1) + j];
    return sum;
}

inline double mean_queue_rt(const StationaryDistribution& dist,
                            const ModelParams& params) {
    detail::require_same_dim(dist, params);
    const int H = params.threshold_h;
    double sum = 0.0;
    for (int i = 0; i <= params.threshold_r; ++i)
        for (int j = 0; j <= H; ++j) sum += i * dist.probabilities[i * (H + 1) + j];
    return sum;
}

inline double mean_queue_nrt(const StationaryDistribution& dist,
                             const ModelParams& params) {
    detail::require_same_dim(dist, params);
    const int H = params.threshold_h;
    double sum = 0.0;
    for (int i = 0; i <= params.threshold_r; ++i)
        for (int j = 0; j <= H; ++j) sum += j * dist.probabilities[i * (H + 1) + j];
    return sum;
}

/// Rate of NRT packets actually admitted: the admission rate at each
/// occupancy weighted by the stationary probability. Works for either
/// feedback policy since the policy's own band rate is substituted.
inline double effective_nrt_rate(const StationaryDistribution& dist,
                                 const ModelParams& params) {
    detail::require_same_dim(dist, params);
    const int H = params.threshold_h;
    double sum = 0.0;
    for (int i = 0; i <= params.threshold_r; ++i)
        for (int j = 0; j <= H; ++j)
            sum += arrival_rate_nrt(params, i + j) * dist.probabilities[i * (H + 1) + j];
    return sum;
}

/// Mean RT sojourn via Little's law: N_RT / (lambda * (1 - P_LRT)).
inline double delay_rt(const StationaryDistribution& dist, const ModelParams& params) {
    double accepted = params.lambda_rt * (1.0 - loss_probability_rt(dist, params));
    if (!(accepted > 0.0))
        throw ZeroAcceptedFlow("no accepted RT flow; delay undefined");
    return mean_queue_rt(dist, params) / accepted;
}

/// Both NRT delay figures, as (combined-backlog quotient, strict Little).
inline std::pair<double, double> delay_nrt(const StationaryDistribution& dist,
                                           const ModelParams& params) {
    double lam_eff = effective_nrt_rate(dist, params);
    if (!(lam_eff > 0.0))
        throw ZeroAcceptedFlow("no accepted NRT flow; delay undefined");
    double n_rt = mean_queue_rt(dist, params);
    double n_nrt = mean_queue_nrt(dist, params);
    return {(n_rt + n_nrt) / lam_eff, n_nrt / lam_eff};
}

inline QoSReport make_qos_report(const StationaryDistribution& dist,
                                 const ModelParams& params) {
    QoSReport r;
    r.p_lrt = loss_probability_rt(dist, params);
    r.n_rt = mean_queue_rt(dist, params);
    r.n_nrt = mean_queue_nrt(dist, params);
    r.lambda_eff_nrt = effective_nrt_rate(dist, params);
    r.d_rt = delay_rt(dist, params);
    auto [d_paper, d_little] = delay_nrt(dist, params);
    r.d_nrt_paper = d_paper;
    r.d_nrt_little = d_little;
    return r;
}

/// Closed-form M/M/1/K stationary distribution with K = r: p(i) ~ rho^i.
/// The RT occupancy marginal of the full model equals this exactly, for
/// any NRT load and either feedback policy.
inline std::vector<double> rt_marginal_oracle(int r, double lambda, double mu) {
    std::vector<double> p(r + 1);
    double rho = lambda / mu;
    // scale so no component exceeds 1 before normalizing
    for (int i = 0; i <= r; ++i)
        p[i] = rho <= 1.0 ? std::pow(rho, i) : std::pow(rho, i - r);
    double sum = kahan_sum(p);
    for (double& x : p) x /= sum;
    return p;
}

/// Product-form stationary distribution of the NRT-only birth-death chain
/// (RT arrivals absent): birth rate arrival_rate_nrt(j) at level j, death
/// rate mu_nrt. Levels past the first zero birth rate get probability 0.
inline std::vector<double> nrt_only_oracle(const ModelParams& params) {
    const int H = params.threshold_h;
    std::vector<double> p(H + 1, 0.0);
    p[0] = 1.0;
    for (int j = 1; j <= H; ++j) {
        double birth = arrival_rate_nrt(params, j - 1);
        if (birth <= 0.0) break;
        p[j] = p[j - 1] * birth / params.mu_nrt;
    }
    double sum = kahan_sum(p);
    for (double& x : p) x /= sum;
    return p;
}

} // namespace tspq
