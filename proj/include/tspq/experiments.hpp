#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tspq/chart.hpp"
#include "tspq/config.hpp"
#include "tspq/errors.hpp"
#include "tspq/generator.hpp"
#include "tspq/metrics.hpp"
#include "tspq/model.hpp"
#include "tspq/simulator.hpp"
#include "tspq/solver.hpp"

namespace tspq {

/// Shortest representation that round-trips a double exactly.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string policy_tag(const FeedbackPolicy& f) {
    if (f.kind == FeedbackPolicy::Kind::Linear) return "linear";
    return "constant:" + format_g17(f.fraction);
}

struct SimColumns {
    double rt_loss = 0, rt_loss_hw = 0;
    double n_rt = 0, n_rt_hw = 0;
    double n_nrt = 0, n_nrt_hw = 0;
    double lambda_eff = 0, lambda_eff_hw = 0;
    double d_rt = 0, d_rt_hw = 0;
    double d_nrt = 0, d_nrt_hw = 0;
};

inline SimColumns sim_columns(const SimEstimate& est) {
    SimColumns c;
    c.rt_loss = est.rt_loss_fraction.point, c.rt_loss_hw = est.rt_loss_fraction.half_width;
    c.n_rt = est.mean_rt_in_queue.point, c.n_rt_hw = est.mean_rt_in_queue.half_width;
    c.n_nrt = est.mean_nrt_in_queue.point, c.n_nrt_hw = est.mean_nrt_in_queue.half_width;
    c.lambda_eff = est.accepted_nrt_rate.point;
    c.lambda_eff_hw = est.accepted_nrt_rate.half_width;
    c.d_rt = est.mean_rt_sojourn.point, c.d_rt_hw = est.mean_rt_sojourn.half_width;
    c.d_nrt = est.mean_nrt_sojourn.point, c.d_nrt_hw = est.mean_nrt_sojourn.half_width;
    return c;
}

struct ResultRow {
    std::string policy;
    int n = 0, r = 0, l = 0, h = 0;
    double lambda_rt = 0, lambda_nrt = 0, mu_rt = 0, mu_nrt = 0;
    double p_lrt = 0, n_rt = 0, n_nrt = 0;
    double d_rt = 0, d_nrt_paper = 0, d_nrt_little = 0;
    double lambda_eff = 0, residual = 0;
    std::optional<SimColumns> sim;
};

/// Solves one model and collects every metric into a row. A stationary
/// residual above 1e-10 is a hard failure, never silently emitted.
inline ResultRow run_solve(const ModelParams& raw) {
    ModelParams p = validate_params(raw);
    RateMatrix gen = build_generator(p);
    StationaryDistribution dist = solve_stationary_direct(gen);
    if (!(dist.residual_inf <= 1e-10))
        throw NumericalFailure("stationary residual " + format_g17(dist.residual_inf) +
                               " exceeds 1e-10");
    QoSReport q = make_qos_report(dist, p);

    ResultRow row;
    row.policy = policy_tag(p.feedback);
    row.n = p.capacity_n, row.r = p.threshold_r, row.l = p.threshold_l;
    row.h = p.threshold_h;
    row.lambda_rt = p.lambda_rt, row.lambda_nrt = p.lambda_nrt;
    row.mu_rt = p.mu_rt, row.mu_nrt = p.mu_nrt;
    row.p_lrt = q.p_lrt, row.n_rt = q.n_rt, row.n_nrt = q.n_nrt;
    row.d_rt = q.d_rt, row.d_nrt_paper = q.d_nrt_paper;
    row.d_nrt_little = q.d_nrt_little;
    row.lambda_eff = q.lambda_eff_nrt, row.residual = dist.residual_inf;
    return row;
}

struct PointError {
    std::string policy;
    double axis_value = 0;
    std::string message;
    ErrorKind kind = ErrorKind::Config;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<PointError> errors;
};

/// Solves policies x grid in spec order. Invalid points are reported, not
/// silently skipped; valid points still produce rows. With simulate set,
/// each point also runs a simulation seeded from spec.seed plus the point's
/// position, so reruns of the same spec reproduce every estimate.
inline SweepResult run_sweep(const SweepSpec& spec) {
    SweepResult out;
    std::uint64_t point_index = 0;
    for (const FeedbackPolicy& pol : spec.policies) {
        for (double v : spec.grid) {
            ModelParams p = spec.base;
            p.feedback = pol;
            if (spec.axis == SweepAxis::LambdaNrt)
                p.lambda_nrt = v;
            else
                p.threshold_r = int(v);
            std::uint64_t seed = spec.seed + point_index;
            ++point_index;
            try {
                ResultRow row = run_solve(p);
                if (spec.simulate) {
                    SimConfig sc;
                    sc.params = validate_params(p);
                    sc.seed = seed;
                    row.sim = sim_columns(simulate_run(sc));
                }
                out.rows.push_back(std::move(row));
            } catch (const Error& e) {
                out.errors.push_back({policy_tag(pol), v, e.what(), e.kind()});
            }
        }
    }
    return out;
}

/// Writes rows as CSV. The column set is fixed; simulation columns appear
/// when any row carries them. 17 significant digits, so parsing the file
/// recovers every value bit-for-bit.
inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty()) throw EmptyResult("no rows to emit");
    bool with_sim = false;
    for (const ResultRow& row : rows) with_sim = with_sim || row.sim.has_value();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << "policy,n,r,l,h,lambda_rt,lambda_nrt,mu_rt,mu_nrt,p_lrt,n_rt,n_nrt,d_rt,"
          "d_nrt_paper,d_nrt_little,lambda_eff,residual";
    if (with_sim)
        os << ",sim_rt_loss,sim_rt_loss_hw,sim_n_rt,sim_n_rt_hw,sim_n_nrt,sim_n_nrt_hw,"
              "sim_lambda_eff,sim_lambda_eff_hw,sim_d_rt,sim_d_rt_hw,sim_d_nrt,"
              "sim_d_nrt_hw";
    os << "\n";

    for (const ResultRow& row : rows) {
        os << row.policy << ',' << row.n << ',' << row.r << ',' << row.l << ','
           << row.h;
        for (double v : {row.lambda_rt, row.lambda_nrt, row.mu_rt, row.mu_nrt,
                         row.p_lrt, row.n_rt, row.n_nrt, row.d_rt, row.d_nrt_paper,
                         row.d_nrt_little, row.lambda_eff, row.residual})
            os << ',' << format_g17(v);
        if (with_sim) {
            if (row.sim) {
                const SimColumns& c = *row.sim;
                for (double v : {c.rt_loss, c.rt_loss_hw, c.n_rt, c.n_rt_hw, c.n_nrt,
                                 c.n_nrt_hw, c.lambda_eff, c.lambda_eff_hw, c.d_rt,
                                 c.d_rt_hw, c.d_nrt, c.d_nrt_hw})
                    os << ',' << format_g17(v);
            } else {
                for (int k = 0; k < 12; ++k) os << ',';
            }
        }
        os << "\n";
    }
    if (!os) throw IoError("write to '" + path + "' failed");
}

struct FigureSummary {
    int figure = 0;
    std::string claim;
    bool confirmed = false;
    std::optional<double> crossover;
    std::vector<std::string> point_lines;
    std::string grid_note;
};

struct ReproduceResult {
    std::vector<ResultRow> rows;
    FigureSummary summary;
    std::string csv_path;
    std::string summary_path;
    std::string chart_path;
};

inline std::vector<double> default_rate_grid() {
    std::vector<double> g;
    for (int k = 0; k <= 12; ++k) g.push_back(5.0 + 2.5 * k);
    return g;
}

inline std::vector<double> default_threshold_grid() {
    std::vector<double> g;
    for (int r = 10; r <= 45; r += 5) g.push_back(double(r));
    return g;
}

namespace detail {

inline ModelParams canonical_base() {
    ModelParams p;
    p.capacity_n = 100, p.threshold_r = 30, p.threshold_l = 50;
    p.lambda_rt = 30.0, p.lambda_nrt = 0.0;
    p.mu_rt = 30.0, p.mu_nrt = 35.0;
    p.feedback = FeedbackPolicy::linear();
    return p;
}

inline std::string format_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct FigureLayout {
    int figure = 0;
    SweepAxis axis = SweepAxis::LambdaNrt;
    std::vector<double> grid;
    bool grid_is_default = true;
    ModelParams base;
    FeedbackPolicy policy_a, policy_b; // claim compares a against b
    std::string title;
    std::string claim;
    bool crossover_mode = false; // figure 4: b wins low, a wins high, one flip
};

inline ReproduceResult reproduce_figure(const FigureLayout& fl,
                                        const std::string& outdir) {
    try {
        std::filesystem::create_directories(outdir);
    } catch (const std::filesystem::filesystem_error& e) {
        throw IoError(std::string("cannot create output directory: ") + e.what());
    }
    if (fl.grid.empty()) throw InvalidConfig("grid must be nonempty");
    for (std::size_t k = 1; k < fl.grid.size(); ++k)
        if (!(fl.grid[k - 1] < fl.grid[k]))
            throw InvalidConfig("grid values must be strictly increasing");
    if (fl.axis == SweepAxis::ThresholdR)
        for (double g : fl.grid)
            if (g != double(int(g)))
                throw InvalidConfig("threshold_r grid values must be integers");

    SweepSpec spec;
    spec.base = fl.base;
    spec.axis = fl.axis;
    spec.grid = fl.grid;
    spec.policies = {fl.policy_a, fl.policy_b};
    SweepResult swept = run_sweep(spec);
    if (!swept.errors.empty()) {
        std::string joined;
        for (const PointError& e : swept.errors) {
            if (!joined.empty()) joined += "; ";
            joined += e.policy + " at " + to_string(fl.axis) + "=" +
                      format_short(e.axis_value) + ": " + e.message;
        }
        throw Error(swept.errors.front().kind, joined);
    }

    const std::size_t m = fl.grid.size();
    const std::string tag_a = policy_tag(fl.policy_a), tag_b = policy_tag(fl.policy_b);
    const std::string axis_name = to_string(fl.axis);
    const double tie_tol = 1e-9;

    FigureSummary summary;
    summary.figure = fl.figure;
    summary.claim = fl.claim;
    summary.grid_note =
        fl.grid_is_default
            ? "default grid; endpoints are an implementation choice"
            : "user-supplied grid";

    std::vector<double> delta(m);
    for (std::size_t k = 0; k < m; ++k) {
        const ResultRow& ra = swept.rows[k];
        const ResultRow& rb = swept.rows[m + k];
        delta[k] = ra.d_nrt_paper - rb.d_nrt_paper;
        std::string lower = std::abs(delta[k]) <= tie_tol
                                ? "tie"
                                : (delta[k] < 0 ? tag_a : tag_b);
        summary.point_lines.push_back(
            axis_name + "=" + format_short(fl.grid[k]) + ": " + tag_a +
            " d_nrt_paper=" + format_short(ra.d_nrt_paper) + " n_nrt=" +
            format_short(ra.n_nrt) + ", " + tag_b + " d_nrt_paper=" +
            format_short(rb.d_nrt_paper) + " n_nrt=" + format_short(rb.n_nrt) +
            ", lower delay: " + lower);
    }

    if (!fl.crossover_mode) {
        summary.confirmed = true;
        for (double d : delta) summary.confirmed = summary.confirmed && d <= tie_tol;
    } else {
        std::vector<int> sign(m);
        for (std::size_t k = 0; k < m; ++k)
            sign[k] = std::abs(delta[k]) <= tie_tol ? 0 : (delta[k] > 0 ? 1 : -1);
        std::vector<int> nonzero;
        for (int s : sign)
            if (s != 0) nonzero.push_back(s);
        int flips = 0;
        for (std::size_t k = 1; k < nonzero.size(); ++k)
            if (nonzero[k] != nonzero[k - 1]) ++flips;
        summary.confirmed = !nonzero.empty() && nonzero.front() > 0 &&
                            nonzero.back() < 0 && flips == 1;
        for (std::size_t k = 1; k < m; ++k) {
            if (sign[k - 1] > 0 && sign[k] < 0) {
                summary.crossover =
                    fl.grid[k - 1] + delta[k - 1] * (fl.grid[k] - fl.grid[k - 1]) /
                                         (delta[k - 1] - delta[k]);
                break;
            }
            if (sign[k] == 0 && sign[k - 1] > 0) {
                summary.crossover = fl.grid[k];
                break;
            }
        }
    }

    std::string stem = "fig" + std::to_string(fl.figure);
    ReproduceResult out;
    out.rows = std::move(swept.rows);
    out.summary = summary;
    out.csv_path = outdir + "/" + stem + ".csv";
    out.summary_path = outdir + "/" + stem + "_summary.txt";
    out.chart_path = outdir + "/" + stem + ".svg";

    emit_csv(out.rows, out.csv_path);

    std::ofstream os(out.summary_path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + out.summary_path + "' for writing");
    os << "figure " << fl.figure << ": " << fl.title << "\n";
    os << "policies: " << tag_a << " vs " << tag_b << "\n";
    os << "axis: " << axis_name << "\n";
    os << "grid:";
    for (double g : fl.grid) os << ' ' << format_short(g);
    os << " (" << summary.grid_note << ")\n";
    os << "claim: " << fl.claim << "\n";
    for (const std::string& line : summary.point_lines) os << line << "\n";
    if (fl.crossover_mode) {
        if (summary.crossover)
            os << "crossover: " << axis_name << " near "
               << format_short(*summary.crossover) << "\n";
        else
            os << "crossover: none found on this grid\n";
    }
    os << "verdict: " << (summary.confirmed ? "CONFIRMED" : "CONTRADICTED") << "\n";
    if (!os) throw IoError("write to '" + out.summary_path + "' failed");
    os.close();

    ChartSeries sa{tag_a, {}}, sb{tag_b, {}};
    for (std::size_t k = 0; k < m; ++k) {
        sa.points.emplace_back(fl.grid[k], out.rows[k].d_nrt_paper);
        sb.points.emplace_back(fl.grid[k], out.rows[m + k].d_nrt_paper);
    }
    write_line_chart(out.chart_path, fl.title, axis_name, "d_nrt_paper", {sa, sb});
    return out;
}

} // namespace detail

/// Canonical model, NRT load swept, linear ramp against a constant half-rate
/// cut. The claim under test: the ramp never yields a worse NRT delay.
inline ReproduceResult reproduce_fig3(const std::string& outdir,
                                      std::vector<double> grid = {}) {
    detail::FigureLayout fl;
    fl.figure = 3;
    fl.axis = SweepAxis::LambdaNrt;
    fl.grid_is_default = grid.empty();
    fl.grid = fl.grid_is_default ? default_rate_grid() : std::move(grid);
    fl.base = detail::canonical_base();
    fl.policy_a = FeedbackPolicy::linear();
    fl.policy_b = FeedbackPolicy::constant_fraction(0.5);
    fl.title = "NRT delay versus nominal NRT arrival rate";
    fl.claim = "linear d_nrt_paper <= constant:0.5 d_nrt_paper at every grid point";
    return detail::reproduce_figure(fl, outdir);
}

/// Same sweep against a constant quarter-rate cut. The claim under test: the
/// deeper constant cut wins at light NRT load, the ramp wins at heavy load,
/// and they trade places exactly once.
inline ReproduceResult reproduce_fig4(const std::string& outdir,
                                      std::vector<double> grid = {}) {
    detail::FigureLayout fl;
    fl.figure = 4;
    fl.axis = SweepAxis::LambdaNrt;
    fl.grid_is_default = grid.empty();
    fl.grid = fl.grid_is_default ? default_rate_grid() : std::move(grid);
    fl.base = detail::canonical_base();
    fl.policy_a = FeedbackPolicy::linear();
    fl.policy_b = FeedbackPolicy::constant_fraction(0.25);
    fl.title = "NRT delay versus nominal NRT arrival rate";
    fl.claim = "constant:0.25 has lower d_nrt_paper at the low end, linear at the "
               "high end, with a single crossover";
    fl.crossover_mode = true;
    return detail::reproduce_figure(fl, outdir);
}

/// RT space cap swept at fixed NRT load. The claim under test: the ramp
/// keeps the NRT delay at or below the constant half-rate cut for every cap.
inline ReproduceResult reproduce_fig5(const std::string& outdir,
                                      std::vector<double> grid = {}) {
    detail::FigureLayout fl;
    fl.figure = 5;
    fl.axis = SweepAxis::ThresholdR;
    fl.grid_is_default = grid.empty();
    fl.grid = fl.grid_is_default ? default_threshold_grid() : std::move(grid);
    fl.base = detail::canonical_base();
    fl.base.lambda_nrt = 15.0;
    fl.policy_a = FeedbackPolicy::linear();
    fl.policy_b = FeedbackPolicy::constant_fraction(0.5);
    fl.title = "NRT delay versus RT space cap";
    fl.claim = "linear d_nrt_paper <= constant:0.5 d_nrt_paper for every threshold_r";
    return detail::reproduce_figure(fl, outdir);
}

} // namespace tspq
