#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/core/reduce.hpp"
#include "plap/grid/field.hpp"
#include "plap/orlicz/orlicz_function.hpp"

namespace plap {

enum class NormKind { L2, Lq, orlicz_modular, sup_time_of_space_L2 };

struct NormSpec {
    NormKind kind = NormKind::L2;
    double q = 2.0;
    std::optional<OrliczFunction> phi;

    static NormSpec l2() { return {}; }
    static NormSpec lq(double q) { return {NormKind::Lq, q, std::nullopt}; }
    static NormSpec modular(const OrliczFunction& phi) { return {NormKind::orlicz_modular, 2.0, phi}; }
    static NormSpec sup_time_l2() { return {NormKind::sup_time_of_space_L2, 2.0, std::nullopt}; }
};

namespace detail {

/// |value| over components at each node of one level, mapped through g.
template <class G>
void node_terms(std::span<const double> level, std::size_t comps, G&& g, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < comps; ++c) s += level[i * comps + c] * level[i * comps + c];
        out[i] = g(std::sqrt(s));
    }
}

template <class G>
double weighted_sum(const Field& f, G&& g, unsigned threads) {
    const std::size_t nodes = f.space().nodes();
    std::vector<double> terms(f.levels() * nodes);
    parallel_for(f.levels(), threads, [&](std::size_t k) {
        node_terms(f.level(k), f.components(), g, std::span<double>(terms).subspan(k * nodes, nodes));
    });
    return pairwise_sum(terms) * f.grid().dt * f.space().cell();
}

inline double power_of(double r, double q) { return q == 2.0 ? r * r : std::pow(r, q); }

} // namespace detail

/// Integral of |g|^q over one space level (node sum times cell measure).
inline double space_power_integral(const SpaceGrid& g, std::size_t comps, std::span<const double> level,
                                   double q) {
    std::vector<double> terms(g.nodes());
    detail::node_terms(level, comps, [q](double r) { return detail::power_of(r, q); }, terms);
    return pairwise_sum(terms) * g.cell();
}

inline double space_lq_norm(const SpaceGrid& g, std::size_t comps, std::span<const double> level, double q) {
    if (!(q >= 1.0)) throw InputError("norm: need q >= 1");
    return std::pow(space_power_integral(g, comps, level, q), 1.0 / q);
}

/// Space-time integral of |g|^q.
inline double power_integral(const Field& f, double q, unsigned threads = 1) {
    return detail::weighted_sum(f, [q](double r) { return detail::power_of(r, q); }, threads);
}

inline double field_norm(const Field& f, const NormSpec& spec, unsigned threads = 1) {
    switch (spec.kind) {
    case NormKind::L2:
        return std::sqrt(power_integral(f, 2.0, threads));
    case NormKind::Lq:
        if (!(spec.q >= 1.0) || !std::isfinite(spec.q)) throw InputError("norm: need q >= 1");
        return std::pow(power_integral(f, spec.q, threads), 1.0 / spec.q);
    case NormKind::orlicz_modular: {
        if (!spec.phi) throw InputError("norm: modular needs an Orlicz function");
        const OrliczFunction& phi = *spec.phi;
        return detail::weighted_sum(f, [&phi](double r) { return phi.value(r); }, threads);
    }
    case NormKind::sup_time_of_space_L2: {
        double best = 0.0;
        for (std::size_t k = 0; k < f.levels(); ++k)
            best = std::max(best, space_lq_norm(f.space(), f.components(), f.level(k), 2.0));
        return best;
    }
    }
    return 0.0;
}

inline double l2_norm(const Field& f, unsigned threads = 1) { return field_norm(f, NormSpec::l2(), threads); }

} // namespace plap
