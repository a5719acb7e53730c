#pragma once

#include <cstdio>
#include <ostream>
#include <utility>
#include <vector>

#include "tspq/model.hpp"

namespace tspq {

/// Sparse infinitesimal generator in row-compressed form. Off-diagonal
/// entries are stored in CSR arrays; the diagonal is kept separately so
/// row-sum checks stay O(row). All off-diagonals are nonnegative and each
/// row has at most four of them (RT/NRT arrival, RT/NRT service).
struct RateMatrix {
    int dim = 0;
    std::vector<int> row_start; // size dim + 1
    std::vector<int> col;
    std::vector<double> rate;
    std::vector<double> diag; // diag[s] = -(sum of off-diagonal row s)

    int out_degree(int s) const { return row_start[s + 1] - row_start[s]; }
    double outflow(int s) const { return -diag[s]; }

    /// Signed row sum including the diagonal; zero up to roundoff.
    double row_sum(int s) const {
        double sum = diag[s];
        for (int e = row_start[s]; e < row_start[s + 1]; ++e) sum += rate[e];
        return sum;
    }
};

/// Outgoing transitions of one state, zero-rate ones omitted.
/// RT service preempts NRT: an NRT departure can only happen while no RT
/// packet is present.
inline std::vector<std::pair<State, double>> transitions_from(const ModelParams& p,
                                                              State s) {
    StateSpace space(p);
    if (!space.contains(s))
        throw InvalidState("state (" + std::to_string(s.rt_count) + "," +
                           std::to_string(s.nrt_count) + ") outside the lattice");
    int i = s.rt_count, j = s.nrt_count;
    std::vector<std::pair<State, double>> out;
    out.reserve(4);
    if (i < p.threshold_r) out.push_back({State{i + 1, j}, p.lambda_rt});
    double admit = arrival_rate_nrt(p, i + j);
    if (admit > 0.0) out.push_back({State{i, j + 1}, admit});
    if (i > 0) out.push_back({State{i - 1, j}, p.mu_rt});
    if (i == 0 && j > 0) out.push_back({State{i, j - 1}, p.mu_nrt});
    return out;
}

inline RateMatrix build_generator(const ModelParams& p) {
    StateSpace space(p);
    RateMatrix gen;
    gen.dim = space.size();
    gen.row_start.reserve(gen.dim + 1);
    gen.row_start.push_back(0);
    gen.col.reserve(std::size_t(gen.dim) * 4);
    gen.rate.reserve(std::size_t(gen.dim) * 4);
    gen.diag.reserve(gen.dim);
    for (int n = 0; n < gen.dim; ++n) {
        double total = 0.0;
        for (const auto& [target, r] : transitions_from(p, space.state_of(n))) {
            gen.col.push_back(space.index_of(target));
            gen.rate.push_back(r);
            total += r;
        }
        gen.row_start.push_back(int(gen.col.size()));
        gen.diag.push_back(-total);
    }
    return gen;
}

/// Plain-text triplet dump "row col rate", one stored entry per line,
/// diagonal included, rates in full precision.
inline void dump_triplets(const RateMatrix& gen, std::ostream& os) {
    char buf[64];
    for (int s = 0; s < gen.dim; ++s) {
        std::snprintf(buf, sizeof buf, "%.17g", gen.diag[s]);
        os << s << ' ' << s << ' ' << buf << '\n';
        for (int e = gen.row_start[s]; e < gen.row_start[s + 1]; ++e) {
            std::snprintf(buf, sizeof buf, "%.17g", gen.rate[e]);
            os << s << ' ' << gen.col[e] << ' ' << buf << '\n';
        }
    }
}

} // namespace tspq
