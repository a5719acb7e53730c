#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tspq/errors.hpp"

namespace tspq {

/// How the NRT admission rate behaves while total occupancy sits in [L, H).
///
/// Below L the nominal rate lambda_nrt applies unchanged; at or above H
/// admission stops. In between, Linear ramps the rate down from lambda_nrt
/// at k = L to 0 at k = H, while ConstantFraction holds it at c * lambda_nrt.
struct FeedbackPolicy {
    enum class Kind { Linear, ConstantFraction };

    Kind kind = Kind::Linear;
    double fraction = 1.0; // used only by ConstantFraction; must be in (0, 1]

    static FeedbackPolicy linear() { return {Kind::Linear, 1.0}; }
    static FeedbackPolicy constant_fraction(double c) {
        return {Kind::ConstantFraction, c};
    }

    bool operator==(const FeedbackPolicy&) const = default;
};

/// Full parameterization of the two-class buffer. threshold_h is always
/// derived as capacity_n - threshold_r; use validate_params to construct.
struct ModelParams {
    int capacity_n = 0;  // total buffer capacity N
    int threshold_r = 0; // RT space cap R
    int threshold_l = 0; // feedback onset L (total occupancy)
    int threshold_h = 0; // admission cutoff H = N - R (derived)
    double lambda_rt = 0.0;  // RT Poisson arrival rate
    double lambda_nrt = 0.0; // nominal NRT Poisson arrival rate
    double mu_rt = 0.0;      // RT exponential service rate
    double mu_nrt = 0.0;     // NRT exponential service rate
    FeedbackPolicy feedback;

    bool operator==(const ModelParams&) const = default;
};

/// Checks invariants and returns params with threshold_h filled in.
/// Any threshold_h on the candidate is ignored and recomputed.
inline ModelParams validate_params(ModelParams raw) {
    raw.threshold_h = raw.capacity_n - raw.threshold_r;
    if (!(0 < raw.threshold_r && raw.threshold_r < raw.threshold_l &&
          raw.threshold_l < raw.threshold_h)) {
        throw ThresholdOrderViolation(
            "thresholds must satisfy 0 < R < L < N - R; got R=" +
            std::to_string(raw.threshold_r) + " L=" + std::to_string(raw.threshold_l) +
            " N=" + std::to_string(raw.capacity_n));
    }
    if (!(raw.lambda_rt > 0.0) || !std::isfinite(raw.lambda_rt))
        throw NonPositiveRate("lambda_rt must be positive and finite");
    if (!(raw.lambda_nrt >= 0.0) || !std::isfinite(raw.lambda_nrt))
        throw NonPositiveRate("lambda_nrt must be nonnegative and finite");
    if (!(raw.mu_rt > 0.0) || !std::isfinite(raw.mu_rt))
        throw NonPositiveRate("mu_rt must be positive and finite");
    if (!(raw.mu_nrt > 0.0) || !std::isfinite(raw.mu_nrt))
        throw NonPositiveRate("mu_nrt must be positive and finite");
    if (raw.feedback.kind == FeedbackPolicy::Kind::ConstantFraction) {
        double c = raw.feedback.fraction;
        if (!(c > 0.0 && c <= 1.0))
            throw BadFraction("constant-fraction coefficient must lie in (0, 1]; got " +
                              std::to_string(c));
    }
    return raw;
}

/// Slope and intercept (a, b) of the linear ramp, so that the band rate is
/// (a*k + b) * lambda_nrt for L <= k < H. Derived from L and H, never stored.
inline std::pair<double, double> linear_coefficients(const ModelParams& p) {
    double span = double(p.threshold_h - p.threshold_l);
    return {-1.0 / span, double(p.threshold_h) / span};
}

/// State-dependent NRT admission rate at total occupancy k.
inline double arrival_rate_nrt(const ModelParams& p, int k) {
    if (k < 0 || k > p.capacity_n)
        throw OutOfRangeOccupancy("occupancy " + std::to_string(k) +
                                  " outside [0, " + std::to_string(p.capacity_n) + "]");
    if (k < p.threshold_l) return p.lambda_nrt;
    if (k >= p.threshold_h) return 0.0;
    if (p.feedback.kind == FeedbackPolicy::Kind::Linear) {
        return p.lambda_nrt * double(p.threshold_h - k) /
               double(p.threshold_h - p.threshold_l);
    }
    return p.feedback.fraction * p.lambda_nrt;
}

/// One point of the lattice {0..R} x {0..H}.
struct State {
    int rt_count = 0;
    int nrt_count = 0;

    bool operator==(const State&) const = default;
};

/// Row-major bijection between states and [0, (R+1)*(H+1)).
class StateSpace {
public:
    explicit StateSpace(const ModelParams& params)
        : params_(params),
          size_((params.threshold_r + 1) * (params.threshold_h + 1)) {}

    const ModelParams& params() const { return params_; }
    int size() const { return size_; }

    bool contains(State s) const {
        return s.rt_count >= 0 && s.rt_count <= params_.threshold_r &&
               s.nrt_count >= 0 && s.nrt_count <= params_.threshold_h;
    }

    int index_of(State s) const {
        if (!contains(s))
            throw InvalidState("state (" + std::to_string(s.rt_count) + "," +
                               std::to_string(s.nrt_count) + ") outside the lattice");
        return s.rt_count * (params_.threshold_h + 1) + s.nrt_count;
    }

    State state_of(int idx) const {
        if (idx < 0 || idx >= size_)
            throw InvalidState("index " + std::to_string(idx) + " outside [0, " +
                               std::to_string(size_) + ")");
        int w = params_.threshold_h + 1;
        return State{idx / w, idx % w};
    }

private:
    ModelParams params_;
    int size_;
};

/// All states in index order.
inline std::vector<State> enumerate_states(const ModelParams& params) {
    StateSpace space(params);
    std::vector<State> out;
    out.reserve(space.size());
    for (int n = 0; n < space.size(); ++n) out.push_back(space.state_of(n));
    return out;
}

} // namespace tspq
