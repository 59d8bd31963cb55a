#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plap/core/error.hpp"

namespace plap {

enum class Setting { time, space_whole, space_refined_case_a, space_refined_case_b };

inline const char* to_string(Setting s) {
    switch (s) {
    case Setting::time:
        return "time";
    case Setting::space_whole:
        return "space_whole";
    case Setting::space_refined_case_a:
        return "space_refined_case_a";
    case Setting::space_refined_case_b:
        return "space_refined_case_b";
    }
    return "?";
}

inline Setting parse_setting(const std::string& s) {
    if (s == "time") return Setting::time;
    if (s == "space_whole") return Setting::space_whole;
    if (s == "space_refined_case_a" || s == "case_a") return Setting::space_refined_case_a;
    if (s == "space_refined_case_b" || s == "case_b") return Setting::space_refined_case_b;
    throw InputError("unknown prediction setting '" + s + "'");
}

/// Predicted order of u_t; `applies` is false outside the p-range of the result.
struct Prediction {
    bool applies = false;
    double beta = 0.0;
    std::string note;
};

/// time: 1/2. space_whole: 1/4.
/// case a (p >= 2, periodic): min{1/2, 1/4 + 1/p}.
/// case b (1 < p <= 2): min{1/2, max{(p + 2 - (2 - p) n / 2) / (2p), 3/4 - n (2 - p) / 8, 1/4}}.
inline Prediction predict_beta(double p, std::size_t n, Setting s) {
    if (!(p > 1.0) || !std::isfinite(p)) throw InputError("predict_beta: need p > 1");
    if (n < 1) throw InputError("predict_beta: need n >= 1");
    const double dn = static_cast<double>(n);
    switch (s) {
    case Setting::time:
        return {true, 0.5, "order 1/2 in time"};
    case Setting::space_whole:
        return {true, 0.25, "order 1/4 in space"};
    case Setting::space_refined_case_a:
        if (p < 2.0) return {false, 0.0, "theorem does not apply: case (a) needs p >= 2"};
        return {true, std::min(0.5, 0.25 + 1.0 / p), "min{1/2, 1/4 + 1/p}"};
    case Setting::space_refined_case_b: {
        if (p > 2.0) return {false, 0.0, "theorem does not apply: case (b) needs 1 < p <= 2"};
        const double b1 = (p + 2.0 - (2.0 - p) * dn / 2.0) / (2.0 * p);
        const double b2 = 0.75 - dn * (2.0 - p) / 8.0;
        return {true, std::min(0.5, std::max({b1, b2, 0.25})), "case (b) formula"};
    }
    }
    throw InputError("predict_beta: unknown setting");
}

/// n q / (n - alpha q), or all_finite when n <= alpha q.
struct EmbeddingExponent {
    bool all_finite = false;
    double value = 0.0;
};

inline EmbeddingExponent sobolev_embedding_exponent(std::size_t n, double alpha, double q) {
    if (n < 1) throw InputError("embedding: need n >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("embedding: need alpha in (0, 1]");
    if (!(q >= 1.0) || !std::isfinite(q)) throw InputError("embedding: need q >= 1");
    const double dn = static_cast<double>(n);
    if (dn - alpha * q <= 0.0) return {true, std::numeric_limits<double>::infinity()};
    return {false, dn * q / (dn - alpha * q)};
}

} // namespace plap
