#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tspq/model.hpp"
#include "tspq/solver.hpp"

namespace tspq {

/// Residuals of the full-balance equations evaluated at a candidate
/// distribution, grouped by the structural position of the state
/// (corners, edges, feedback band, saturated region).
struct BalanceReport {
    struct Family {
        std::string name;
        double max_residual = 0.0;
        int equations = 0;
    };

    double max_residual = 0.0;
    State worst_state;
    double normalization_error = 0.0; // |1 - sum p|
    /// Empty-state equation with the service rates as defined (mu drains
    /// RT, mu_nrt drains NRT). Included in max_residual.
    double empty_state_residual = 0.0;
    /// Same equation with the two service rates interchanged; reported for
    /// diagnosis only and excluded from max_residual.
    double empty_state_swapped_residual = 0.0;
    std::vector<Family> families;
};

/// Evaluates the balance equation of every state at `dist`.
///
/// Each equation is written out in the edge/band structure of the model
/// rather than derived from a rate matrix, so this check is an independent
/// route against build_generator.
inline BalanceReport check_balance_residual(const ModelParams& params,
                                            const StationaryDistribution& dist) {
    const int R = params.threshold_r, L = params.threshold_l, H = params.threshold_h;
    const double lam = params.lambda_rt, mu = params.mu_rt, mu1 = params.mu_nrt;
    StateSpace space(params);
    if (int(dist.probabilities.size()) != space.size())
        throw DimensionMismatch("distribution has " +
                                std::to_string(dist.probabilities.size()) +
                                " components, state space has " +
                                std::to_string(space.size()));

    auto p = [&](int i, int j) { return dist.probabilities[i * (H + 1) + j]; };
    auto rate = [&](int k) { return arrival_rate_nrt(params, k); };

    BalanceReport report;
    report.normalization_error = std::abs(1.0 - kahan_sum(dist.probabilities));

    BalanceReport::Family* fam = nullptr;
    auto open_family = [&](const char* name) {
        report.families.push_back({name, 0.0, 0});
        fam = &report.families.back();
    };
    auto equation = [&](int i, int j, double lhs, double rhs) {
        double resid = std::abs(lhs - rhs);
        fam->max_residual = std::max(fam->max_residual, resid);
        fam->equations += 1;
        if (resid > report.max_residual) {
            report.max_residual = resid;
            report.worst_state = State{i, j};
        }
        return resid;
    };

    // --- row i = 0
    open_family("empty");
    report.empty_state_residual =
        equation(0, 0, (rate(0) + lam) * p(0, 0), mu1 * p(0, 1) + mu * p(1, 0));
    report.empty_state_swapped_residual =
        std::abs((rate(0) + lam) * p(0, 0) - (mu * p(0, 1) + mu1 * p(1, 0)));

    open_family("i0_full_rate");
    for (int j = 1; j <= L - 1; ++j)
        equation(0, j, (lam + rate(j) + mu1) * p(0, j),
                 mu * p(1, j) + rate(j - 1) * p(0, j - 1) + mu1 * p(0, j + 1));

    open_family("i0_band_onset");
    equation(0, L, (lam + rate(L) + mu1) * p(0, L),
             mu * p(1, L) + rate(L - 1) * p(0, L - 1) + mu1 * p(0, L + 1));

    open_family("i0_band");
    for (int j = L + 1; j <= H - 1; ++j)
        equation(0, j, (lam + rate(j) + mu1) * p(0, j),
                 mu * p(1, j) + rate(j - 1) * p(0, j - 1) + mu1 * p(0, j + 1));

    open_family("i0_cutoff");
    equation(0, H, (lam + mu1) * p(0, H), rate(H - 1) * p(0, H - 1) + mu * p(1, H));

    // --- rows 0 < i < R
    open_family("mid_empty_nrt");
    for (int i = 1; i <= R - 1; ++i)
        equation(i, 0, (rate(i) + mu + lam) * p(i, 0),
                 lam * p(i - 1, 0) + mu * p(i + 1, 0));

    open_family("mid_full_rate");
    for (int i = 1; i <= R - 1; ++i)
        for (int j = 1; j <= L - i - 1; ++j)
            equation(i, j, (rate(i + j) + mu + lam) * p(i, j),
                     lam * p(i - 1, j) + rate(i + j - 1) * p(i, j - 1) +
                         mu * p(i + 1, j));

    open_family("mid_band_onset");
    for (int i = 1; i <= R - 1; ++i)
        equation(i, L - i, (rate(L) + mu + lam) * p(i, L - i),
                 lam * p(i - 1, L - i) + rate(L - 1) * p(i, L - i - 1) +
                     mu * p(i + 1, L - i));

    open_family("mid_band");
    for (int i = 1; i <= R - 1; ++i)
        for (int j = L - i + 1; j <= H - i - 1; ++j)
            equation(i, j, (rate(i + j) + mu + lam) * p(i, j),
                     lam * p(i - 1, j) + rate(i + j - 1) * p(i, j - 1) +
                         mu * p(i + 1, j));

    open_family("mid_cutoff");
    for (int i = 1; i <= R - 1; ++i)
        equation(i, H - i, (mu + lam) * p(i, H - i),
                 rate(H - 1) * p(i, H - i - 1) + mu * p(i + 1, H - i) +
                     lam * p(i - 1, H - i));

    open_family("mid_saturated");
    for (int i = 1; i <= R - 1; ++i)
        for (int j = H - i + 1; j <= H; ++j)
            equation(i, j, (mu + lam) * p(i, j),
                     lam * p(i - 1, j) + mu * p(i + 1, j));

    // --- row i = R
    open_family("rmax_empty_nrt");
    equation(R, 0, (mu + rate(R)) * p(R, 0), lam * p(R - 1, 0));

    open_family("rmax_full_rate");
    for (int j = 1; j <= L - R - 1; ++j)
        equation(R, j, (rate(R + j) + mu) * p(R, j),
                 lam * p(R - 1, j) + rate(R + j - 1) * p(R, j - 1));

    open_family("rmax_band_onset");
    equation(R, L - R, (rate(L) + mu) * p(R, L - R),
             lam * p(R - 1, L - R) + rate(L - 1) * p(R, L - R - 1));

    open_family("rmax_band");
    for (int j = L - R + 1; j <= H - R - 1; ++j)
        equation(R, j, (rate(R + j) + mu) * p(R, j),
                 lam * p(R - 1, j) + rate(R + j - 1) * p(R, j - 1));

    open_family("rmax_cutoff");
    equation(R, H - R, mu * p(R, H - R),
             lam * p(R - 1, H - R) + rate(H - 1) * p(R, H - R - 1));

    open_family("rmax_saturated");
    for (int j = H - R + 1; j <= H; ++j)
        equation(R, j, mu * p(R, j), lam * p(R - 1, j));

    return report;
}

} // namespace tspq
