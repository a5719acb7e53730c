#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"

#include "tspq/balance.hpp"
#include "tspq/config.hpp"
#include "tspq/experiments.hpp"
#include "tspq/generator.hpp"
#include "tspq/metrics.hpp"
#include "tspq/model.hpp"
#include "tspq/simulator.hpp"
#include "tspq/solver.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw tspq::IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    if (is.bad()) throw tspq::IoError("read from '" + path + "' failed");
    return ss.str();
}

tspq::ModelParams require_model(const tspq::ParsedConfig& parsed) {
    if (const auto* p = std::get_if<tspq::ModelParams>(&parsed)) return *p;
    throw tspq::InvalidConfig(
        "configuration describes a sweep (axis/grid present); use the sweep command");
}

tspq::SweepSpec require_sweep(const tspq::ParsedConfig& parsed) {
    if (const auto* s = std::get_if<tspq::SweepSpec>(&parsed)) return *s;
    throw tspq::InvalidConfig(
        "configuration describes a single model; use the solve command");
}

void print_model_line(const tspq::ModelParams& p) {
    std::cout << "model: n=" << p.capacity_n << " r=" << p.threshold_r
              << " l=" << p.threshold_l << " h=" << p.threshold_h
              << " lambda_rt=" << tspq::format_g17(p.lambda_rt)
              << " lambda_nrt=" << tspq::format_g17(p.lambda_nrt)
              << " mu_rt=" << tspq::format_g17(p.mu_rt)
              << " mu_nrt=" << tspq::format_g17(p.mu_nrt)
              << " policy=" << tspq::policy_tag(p.feedback) << "\n";
}

int cmd_solve(const std::string& config_path, bool simulate, std::uint64_t seed,
              std::uint64_t events) {
    tspq::ModelParams params = require_model(tspq::parse_config(read_file(config_path)));
    tspq::ResultRow row = tspq::run_solve(params);
    print_model_line(params);
    std::cout << "p_lrt        = " << tspq::format_g17(row.p_lrt) << "\n"
              << "n_rt         = " << tspq::format_g17(row.n_rt) << "\n"
              << "n_nrt        = " << tspq::format_g17(row.n_nrt) << "\n"
              << "d_rt         = " << tspq::format_g17(row.d_rt) << "\n"
              << "d_nrt_paper  = " << tspq::format_g17(row.d_nrt_paper) << "\n"
              << "d_nrt_little = " << tspq::format_g17(row.d_nrt_little) << "\n"
              << "lambda_eff   = " << tspq::format_g17(row.lambda_eff) << "\n"
              << "residual     = " << tspq::format_g17(row.residual) << "\n";
    if (!simulate) return 0;

    tspq::SimConfig sc;
    sc.params = params;
    sc.seed = seed;
    sc.measured_events = events;
    tspq::SimEstimate est = tspq::simulate_run(sc);
    std::cout << "simulation: seed=" << seed << " events=" << events
              << " measured_time=" << tspq::format_g17(est.measured_time) << "\n";
    auto line = [](const char* name, const tspq::MetricEstimate& m) {
        std::cout << name << tspq::format_g17(m.point) << " +- "
                  << tspq::format_g17(m.half_width) << "\n";
    };
    line("sim rt_loss      = ", est.rt_loss_fraction);
    line("sim n_rt         = ", est.mean_rt_in_queue);
    line("sim n_nrt        = ", est.mean_nrt_in_queue);
    line("sim lambda_eff   = ", est.accepted_nrt_rate);
    line("sim d_rt         = ", est.mean_rt_sojourn);
    line("sim d_nrt        = ", est.mean_nrt_sojourn);

    tspq::StationaryDistribution dist =
        tspq::solve_stationary_direct(tspq::build_generator(params));
    tspq::QoSReport report = tspq::make_qos_report(dist, params);
    tspq::ComparisonVerdict verdict = tspq::compare_to_analytic(est, report, params);
    for (const tspq::ComparisonLine& c : verdict.lines)
        std::cout << "check " << c.metric << ": analytic="
                  << tspq::format_g17(c.analytic) << " sim="
                  << tspq::format_g17(c.sim_point) << " hw="
                  << tspq::format_g17(c.half_width) << " "
                  << (c.pass ? "PASS" : "FAIL") << "\n";
    std::cout << "measured d_nrt " << tspq::format_g17(verdict.measured_nrt_sojourn)
              << " sits closer to " << verdict.closer_nrt_formula << " ("
              << tspq::format_g17(verdict.closer_nrt_formula == "d_nrt_paper"
                                      ? verdict.d_nrt_paper
                                      : verdict.d_nrt_little)
              << ")\n";
    std::cout << "agreement: " << (verdict.all_pass ? "PASS" : "FAIL") << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& outdir) {
    tspq::SweepSpec spec = require_sweep(tspq::parse_config(read_file(config_path)));
    try {
        std::filesystem::create_directories(outdir);
    } catch (const std::filesystem::filesystem_error& e) {
        throw tspq::IoError(std::string("cannot create output directory: ") + e.what());
    }
    tspq::SweepResult result = tspq::run_sweep(spec);
    for (const tspq::PointError& e : result.errors)
        std::cerr << "point failed: policy=" << e.policy << " "
                  << tspq::to_string(spec.axis) << "="
                  << tspq::format_g17(e.axis_value) << ": " << e.message << "\n";
    if (result.rows.empty())
        throw tspq::Error(result.errors.empty() ? tspq::ErrorKind::Config
                                                : result.errors.front().kind,
                          "no sweep point produced a result");
    std::string csv = outdir + "/sweep.csv";
    tspq::emit_csv(result.rows, csv);
    std::cout << "wrote " << result.rows.size() << " rows to " << csv << "\n";
    if (!result.errors.empty()) {
        std::cerr << result.errors.size() << " point(s) failed\n";
        switch (result.errors.front().kind) {
        case tspq::ErrorKind::Config: return 2;
        case tspq::ErrorKind::Solve: return 3;
        case tspq::ErrorKind::Io: return 4;
        }
    }
    return 0;
}

int cmd_reproduce(int figure, const std::string& outdir, const std::string& grid_arg) {
    std::vector<double> grid;
    if (!grid_arg.empty()) {
        std::size_t start = 0;
        while (start <= grid_arg.size()) {
            std::size_t comma = grid_arg.find(',', start);
            std::string tok = grid_arg.substr(
                start, (comma == std::string::npos ? grid_arg.size() : comma) - start);
            char* end = nullptr;
            double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                throw tspq::InvalidConfig("bad grid value '" + tok + "'");
            grid.push_back(v);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    tspq::ReproduceResult res;
    if (figure == 3)
        res = tspq::reproduce_fig3(outdir, grid);
    else if (figure == 4)
        res = tspq::reproduce_fig4(outdir, grid);
    else
        res = tspq::reproduce_fig5(outdir, grid);

    std::cout << "claim: " << res.summary.claim << "\n";
    for (const std::string& line : res.summary.point_lines) std::cout << line << "\n";
    if (res.summary.crossover)
        std::cout << "crossover near " << tspq::format_g17(*res.summary.crossover)
                  << "\n";
    std::cout << "verdict: " << (res.summary.confirmed ? "CONFIRMED" : "CONTRADICTED")
              << "\n";
    std::cout << "wrote " << res.csv_path << ", " << res.summary_path << ", "
              << res.chart_path << "\n";
    return 0;
}

int cmd_validate(const std::string& config_path, bool dump_generator) {
    tspq::ModelParams params = require_model(tspq::parse_config(read_file(config_path)));
    tspq::RateMatrix gen = tspq::build_generator(params);
    if (dump_generator) {
        tspq::dump_triplets(gen, std::cout);
        return 0;
    }
    tspq::StationaryDistribution dist = tspq::solve_stationary_direct(gen);
    tspq::BalanceReport report = tspq::check_balance_residual(params, dist);
    print_model_line(params);
    std::cout << "states: " << gen.dim << "\n"
              << "solver: " << tspq::to_string(dist.method)
              << " residual=" << tspq::format_g17(dist.residual_inf) << "\n"
              << "balance max residual: " << tspq::format_g17(report.max_residual)
              << " at state (" << report.worst_state.rt_count << ","
              << report.worst_state.nrt_count << ")\n"
              << "normalization error: "
              << tspq::format_g17(report.normalization_error) << "\n"
              << "empty-state equation residual: "
              << tspq::format_g17(report.empty_state_residual) << "\n"
              << "empty-state equation residual, service rates swapped: "
              << tspq::format_g17(report.empty_state_swapped_residual) << "\n"
              << "per-family max residuals:\n";
    for (const tspq::BalanceReport::Family& f : report.families)
        std::cout << "  " << f.name << " (" << f.equations
                  << " eq): " << tspq::format_g17(f.max_residual) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite buffer with RT/NRT time-space priority and NRT admission "
                 "feedback: stationary analysis, QoS metrics, simulation"};
    app.require_subcommand(1);

    std::string config_path, outdir, grid_arg;
    bool simulate = false, dump_generator = false;
    std::uint64_t seed = 1, events = 10000000;
    int figure = 3;

    CLI::App* solve = app.add_subcommand("solve", "Solve one model and print metrics");
    solve->add_option("--config", config_path, "model configuration file")->required();
    solve->add_flag("--simulate", simulate, "also run a simulation cross-check");
    solve->add_option("--seed", seed, "simulation seed");
    solve->add_option("--events", events, "measured simulation events");

    CLI::App* sweep = app.add_subcommand("sweep", "Solve a policy/grid sweep to CSV");
    sweep->add_option("--config", config_path, "sweep configuration file")->required();
    sweep->add_option("--out", outdir, "output directory")->required();

    CLI::App* reproduce =
        app.add_subcommand("reproduce", "Rebuild a comparison scenario and its summary");
    reproduce->add_option("--figure", figure, "scenario number")
        ->required()
        ->check(CLI::IsMember({3, 4, 5}));
    reproduce->add_option("--out", outdir, "output directory")->required();
    reproduce->add_option("--grid", grid_arg,
                          "comma-separated axis grid overriding the default");

    CLI::App* validate =
        app.add_subcommand("validate", "Solve and audit the balance equations");
    validate->add_option("--config", config_path, "model configuration file")
        ->required();
    validate->add_flag("--dump-generator", dump_generator,
                       "print the generator as 'row col rate' triplets and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) return cmd_solve(config_path, simulate, seed, events);
        if (sweep->parsed()) return cmd_sweep(config_path, outdir);
        if (reproduce->parsed()) return cmd_reproduce(figure, outdir, grid_arg);
        return cmd_validate(config_path, dump_generator);
    } catch (const tspq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case tspq::ErrorKind::Config: return 2;
        case tspq::ErrorKind::Solve: return 3;
        case tspq::ErrorKind::Io: return 4;
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
