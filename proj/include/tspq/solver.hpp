#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "tspq/errors.hpp"
#include "tspq/generator.hpp"

namespace tspq {

enum class SolveMethod { DirectElimination, UniformizationPower };

inline const char* to_string(SolveMethod m) {
    return m == SolveMethod::DirectElimination ? "direct-elimination"
                                               : "uniformization-power";
}

/// Equilibrium probability vector over the generator's state space.
/// residual_inf is measured on the returned vector, never assumed.
struct StationaryDistribution {
    std::vector<double> probabilities;
    double residual_inf = 0.0;
    SolveMethod method = SolveMethod::DirectElimination;
    std::int64_t iterations = 0; // 0 for the direct method
};

/// Thrown when power iteration hits max_iter; carries the last iterate.
class NotConverged : public Error {
public:
    NotConverged(std::string msg, StationaryDistribution last)
        : Error(ErrorKind::Solve, std::move(msg)), last_iterate(std::move(last)) {}
    StationaryDistribution last_iterate;
};

/// Compensated sum; keeps the normalization error near machine epsilon
/// even for a few thousand components.
inline double kahan_sum(const std::vector<double>& xs) {
    double sum = 0.0, carry = 0.0;
    for (double x : xs) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

/// States reachable from `source` along positive-rate transitions,
/// in ascending index order.
inline std::vector<int> reachable_from(const RateMatrix& gen, int source) {
    std::vector<char> seen(gen.dim, 0);
    std::vector<int> stack{source};
    seen[source] = 1;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int e = gen.row_start[s]; e < gen.row_start[s + 1]; ++e) {
            int t = gen.col[e];
            if (gen.rate[e] > 0.0 && !seen[t]) {
                seen[t] = 1;
                stack.push_back(t);
            }
        }
    }
    std::vector<int> out;
    for (int s = 0; s < gen.dim; ++s)
        if (seen[s]) out.push_back(s);
    return out;
}

/// Max-norm of dist * gen (stationarity residual).
inline double residual_inf_norm(const RateMatrix& gen,
                                const StationaryDistribution& dist) {
    if (int(dist.probabilities.size()) != gen.dim)
        throw DimensionMismatch("distribution has " +
                                std::to_string(dist.probabilities.size()) +
                                " components, generator dimension is " +
                                std::to_string(gen.dim));
    std::vector<double> flow(gen.dim, 0.0);
    for (int s = 0; s < gen.dim; ++s) {
        double p = dist.probabilities[s];
        if (p == 0.0) continue;
        flow[s] += p * gen.diag[s];
        for (int e = gen.row_start[s]; e < gen.row_start[s + 1]; ++e)
            flow[gen.col[e]] += p * gen.rate[e];
    }
    double worst = 0.0;
    for (double f : flow) worst = std::max(worst, std::abs(f));
    return worst;
}

namespace detail {

inline void normalize(std::vector<double>& p) {
    double sum = kahan_sum(p);
    for (double& x : p) x /= sum;
}

} // namespace detail

/// Direct stationary solve by state-reduction elimination.
///
/// States unreachable from index 0 are excluded up front and get
/// probability exactly 0 (the lambda_nrt = 0 degenerate model leaves the
/// whole j > 0 region unreachable). The elimination runs highest index
/// first and uses only additions, multiplications and divisions of
/// nonnegative quantities, so no cancellation occurs. Every transition of
/// this model moves the row-major index by at most H+1, the reduction
/// preserves that band, and the scans below stay inside it.
inline StationaryDistribution solve_stationary_direct(const RateMatrix& gen) {
    if (gen.dim <= 0) throw DimensionMismatch("empty generator");
    std::vector<int> reach = reachable_from(gen, 0);
    int r = int(reach.size());

    std::vector<int> compact(gen.dim, -1);
    for (int c = 0; c < r; ++c) compact[reach[c]] = c;

    // Dense working copy of the reachable submatrix (off-diagonals only).
    std::vector<double> a(std::size_t(r) * r, 0.0);
    int band = 1;
    for (int c = 0; c < r; ++c) {
        int s = reach[c];
        for (int e = gen.row_start[s]; e < gen.row_start[s + 1]; ++e) {
            if (gen.rate[e] <= 0.0) continue;
            int tc = compact[gen.col[e]];
            if (tc < 0)
                throw ReducibleChain("transition from a reachable to an "
                                     "unreachable state; generator is inconsistent");
            a[std::size_t(c) * r + tc] += gen.rate[e];
            band = std::max(band, std::abs(c - tc));
        }
    }

    std::vector<double> pivot(r, 0.0);
    for (int m = r - 1; m >= 1; --m) {
        int lo = std::max(0, m - band);
        double* row_m = a.data() + std::size_t(m) * r;
        double s_m = 0.0;
        for (int j = lo; j < m; ++j) s_m += row_m[j];
        if (!(s_m > 0.0))
            throw ReducibleChain("zero pivot at reachable state " +
                                 std::to_string(reach[m]));
        pivot[m] = s_m;
        for (int i = lo; i < m; ++i) {
            double into_m = a[std::size_t(i) * r + m];
            if (into_m <= 0.0) continue;
            double f = into_m / s_m;
            double* row_i = a.data() + std::size_t(i) * r;
            for (int j = lo; j < m; ++j) {
                if (j != i && row_m[j] > 0.0) row_i[j] += f * row_m[j];
            }
        }
    }

    std::vector<double> pi(r, 0.0);
    pi[0] = 1.0;
    for (int m = 1; m < r; ++m) {
        int lo = std::max(0, m - band);
        double inflow = 0.0;
        for (int i = lo; i < m; ++i) inflow += pi[i] * a[std::size_t(i) * r + m];
        pi[m] = inflow / pivot[m];
    }
    detail::normalize(pi);

    StationaryDistribution dist;
    dist.probabilities.assign(gen.dim, 0.0);
    for (int c = 0; c < r; ++c) dist.probabilities[reach[c]] = pi[c];
    dist.method = SolveMethod::DirectElimination;
    dist.iterations = 0;
    dist.residual_inf = residual_inf_norm(gen, dist);
    return dist;
}

/// Uniformization with power iteration: P = I + Q/Lambda with
/// Lambda = 1.01 * max row outflow (the slack keeps the embedded chain
/// aperiodic). Starts from the uniform vector on the reachable class and
/// stops when successive iterates differ by at most tol in max-norm.
inline StationaryDistribution solve_stationary_iterative(const RateMatrix& gen,
                                                         double tol = 1e-12,
                                                         std::int64_t max_iter = 200000) {
    if (gen.dim <= 0) throw DimensionMismatch("empty generator");
    if (!(tol > 0.0)) throw InvalidConfig("tol must be positive");
    if (max_iter <= 0) throw InvalidConfig("max_iter must be positive");

    std::vector<int> reach = reachable_from(gen, 0);
    double max_outflow = 0.0;
    for (int s : reach) max_outflow = std::max(max_outflow, gen.outflow(s));
    if (!(max_outflow > 0.0))
        throw NumericalFailure("generator has no outflow on the reachable class");
    double inv_lambda = 1.0 / (1.01 * max_outflow);

    std::vector<double> pi(gen.dim, 0.0), next(gen.dim, 0.0);
    for (int s : reach) pi[s] = 1.0 / double(reach.size());

    std::int64_t it = 0;
    double diff = 0.0;
    for (it = 1; it <= max_iter; ++it) {
        next = pi;
        for (int s = 0; s < gen.dim; ++s) {
            double p = pi[s];
            if (p == 0.0) continue;
            next[s] += p * gen.diag[s] * inv_lambda;
            for (int e = gen.row_start[s]; e < gen.row_start[s + 1]; ++e)
                next[gen.col[e]] += p * gen.rate[e] * inv_lambda;
        }
        diff = 0.0;
        for (int s = 0; s < gen.dim; ++s)
            diff = std::max(diff, std::abs(next[s] - pi[s]));
        pi.swap(next);
        if (diff <= tol) break;
    }

    StationaryDistribution dist;
    dist.probabilities = std::move(pi);
    detail::normalize(dist.probabilities);
    dist.method = SolveMethod::UniformizationPower;
    dist.iterations = std::min(it, max_iter);
    dist.residual_inf = residual_inf_norm(gen, dist);
    if (diff > tol)
        throw NotConverged("power iteration did not reach tol=" + std::to_string(tol) +
                               " within " + std::to_string(max_iter) +
                               " iterations (last diff " + std::to_string(diff) + ")",
                           std::move(dist));
    return dist;
}

} // namespace tspq
