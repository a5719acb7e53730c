#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tspq/errors.hpp"
#include "tspq/model.hpp"

namespace tspq {

enum class SweepAxis { LambdaNrt, ThresholdR };

inline const char* to_string(SweepAxis a) {
    return a == SweepAxis::LambdaNrt ? "lambda_nrt" : "threshold_r";
}

/// A family of models to solve: base parameters, one varied axis, and the
/// policies to run at every grid point.
struct SweepSpec {
    ModelParams base;
    SweepAxis axis = SweepAxis::LambdaNrt;
    std::vector<double> grid;
    std::vector<FeedbackPolicy> policies;
    bool simulate = false;
    std::uint64_t seed = 1;
};

using ParsedConfig = std::variant<ModelParams, SweepSpec>;

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(s.substr(start)));
            return out;
        }
        out.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
}

[[noreturn]] inline void fail_at(int line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

inline double parse_double(std::string_view s, int line, const std::string& key) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail_at(line, "value '" + std::string(s) + "' for " + key + " is not a number");
    return v;
}

inline int parse_int(std::string_view s, int line, const std::string& key) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail_at(line, "value '" + std::string(s) + "' for " + key + " is not an integer");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, int line, const std::string& key) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail_at(line, "value '" + std::string(s) + "' for " + key +
                          " is not an unsigned integer");
    return v;
}

inline FeedbackPolicy parse_policy_token(std::string_view tok, int line) {
    if (tok == "linear") return FeedbackPolicy::linear();
    constexpr std::string_view prefix = "constant:";
    if (tok.substr(0, prefix.size()) == prefix) {
        double c = parse_double(tok.substr(prefix.size()), line, "policy fraction");
        if (!(c > 0.0 && c <= 1.0))
            throw BadFraction("constant-fraction coefficient must lie in (0, 1]; got " +
                              std::string(tok.substr(prefix.size())));
        return FeedbackPolicy::constant_fraction(c);
    }
    fail_at(line, "unknown policy '" + std::string(tok) +
                      "' (expected linear or constant:<c>)");
}

} // namespace detail

/// Parses "key = value" lines into either a single model or a sweep.
///
/// Keys: n, r, l, lambda_rt, lambda_nrt, mu_rt, mu_nrt, policy, axis, grid,
/// seed, simulate. '#' starts a comment. Unknown and duplicate keys are
/// errors. lambda_nrt defaults to 0. policy takes a comma-separated list;
/// more than one entry, or the axis/grid/seed/simulate keys, make the result
/// a sweep. A sweep needs both axis and grid; grid values must be strictly
/// increasing, and integral when the axis is threshold_r.
inline ParsedConfig parse_config(const std::string& text) {
    using detail::fail_at;
    static const std::map<std::string, int, std::less<>> known = {
        {"n", 0},        {"r", 0},      {"l", 0},    {"lambda_rt", 0},
        {"lambda_nrt", 0}, {"mu_rt", 0}, {"mu_nrt", 0}, {"policy", 0},
        {"axis", 0},     {"grid", 0},   {"seed", 0}, {"simulate", 0}};

    std::map<std::string, std::pair<std::string, int>> entries; // key -> value, line
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            fail_at(line_no, "expected key = value");
        std::string key(detail::trim(line.substr(0, eq)));
        std::string value(detail::trim(line.substr(eq + 1)));
        if (known.find(key) == known.end())
            fail_at(line_no, "unknown key '" + key + "'");
        if (!entries.emplace(key, std::make_pair(value, line_no)).second)
            fail_at(line_no, "duplicate key '" + key + "'");
    }

    auto get = [&](const char* key) -> const std::pair<std::string, int>* {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };
    auto require = [&](const char* key) -> const std::pair<std::string, int>& {
        const auto* e = get(key);
        if (!e) throw ParseError(std::string("missing required key '") + key + "'");
        return *e;
    };

    ModelParams base;
    {
        const auto& [v, ln] = require("n");
        base.capacity_n = detail::parse_int(v, ln, "n");
    }
    {
        const auto& [v, ln] = require("r");
        base.threshold_r = detail::parse_int(v, ln, "r");
    }
    {
        const auto& [v, ln] = require("l");
        base.threshold_l = detail::parse_int(v, ln, "l");
    }
    {
        const auto& [v, ln] = require("lambda_rt");
        base.lambda_rt = detail::parse_double(v, ln, "lambda_rt");
    }
    if (const auto* e = get("lambda_nrt"))
        base.lambda_nrt = detail::parse_double(e->first, e->second, "lambda_nrt");
    {
        const auto& [v, ln] = require("mu_rt");
        base.mu_rt = detail::parse_double(v, ln, "mu_rt");
    }
    {
        const auto& [v, ln] = require("mu_nrt");
        base.mu_nrt = detail::parse_double(v, ln, "mu_nrt");
    }

    std::vector<FeedbackPolicy> policies;
    {
        const auto& [v, ln] = require("policy");
        for (std::string_view tok : detail::split(v, ',')) {
            if (tok.empty()) fail_at(ln, "empty policy entry");
            policies.push_back(detail::parse_policy_token(tok, ln));
        }
    }

    const auto* axis_entry = get("axis");
    const auto* grid_entry = get("grid");
    if (static_cast<bool>(axis_entry) != static_cast<bool>(grid_entry)) {
        const auto* present = axis_entry ? axis_entry : grid_entry;
        fail_at(present->second, "axis and grid must be given together");
    }

    if (!axis_entry) {
        for (const char* key : {"seed", "simulate"})
            if (const auto* e = get(key))
                fail_at(e->second, std::string("key '") + key +
                                       "' applies to sweep configurations only");
        if (policies.size() != 1)
            fail_at(get("policy")->second,
                    "a single-model configuration takes exactly one policy");
        base.feedback = policies.front();
        return validate_params(base);
    }

    SweepSpec spec;
    {
        const auto& [v, ln] = *axis_entry;
        if (v == "lambda_nrt")
            spec.axis = SweepAxis::LambdaNrt;
        else if (v == "threshold_r")
            spec.axis = SweepAxis::ThresholdR;
        else
            fail_at(ln, "unknown axis '" + v + "' (expected lambda_nrt or threshold_r)");
    }
    {
        const auto& [v, ln] = *grid_entry;
        for (std::string_view tok : detail::split(v, ',')) {
            if (tok.empty()) fail_at(ln, "empty grid entry");
            spec.grid.push_back(detail::parse_double(tok, ln, "grid"));
        }
        if (spec.grid.empty()) fail_at(ln, "grid must be nonempty");
        for (std::size_t k = 1; k < spec.grid.size(); ++k)
            if (!(spec.grid[k - 1] < spec.grid[k]))
                fail_at(ln, "grid values must be strictly increasing");
        if (spec.axis == SweepAxis::ThresholdR)
            for (double g : spec.grid)
                if (g != double(int(g)))
                    fail_at(ln, "threshold_r grid values must be integers");
    }
    if (const auto* e = get("seed"))
        spec.seed = detail::parse_u64(e->first, e->second, "seed");
    if (const auto* e = get("simulate")) {
        const auto& [v, ln] = *e;
        if (v == "true")
            spec.simulate = true;
        else if (v == "false")
            spec.simulate = false;
        else
            fail_at(ln, "value '" + v + "' for simulate is not true or false");
    }

    base.feedback = policies.front();
    spec.base = validate_params(base);
    spec.policies = std::move(policies);
    return spec;
}

} // namespace tspq
