#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/core/io.hpp"
#include "plap/grid/field.hpp"

namespace plap {

// Binary layout, all float64 little-endian:
//   n, N, nt, nx[0..n), dt, dx[0..n), t0, boundary (0 periodic, 1 Dirichlet)
// followed by the values in row-major (t, x0, x1, component) order.

namespace detail {

inline void put_le(std::string& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

inline double get_le(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw InputError("field binary: truncated input");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(bits);
}

inline std::size_t get_count(const std::string& in, std::size_t& pos) {
    const double v = get_le(in, pos);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw InputError("field binary: bad count");
    return static_cast<std::size_t>(v);
}

} // namespace detail

inline std::string encode_binary(const Field& f) {
    const SpaceTimeGrid& g = f.grid();
    std::string out;
    out.reserve(8 * (f.size() + 12));
    detail::put_le(out, static_cast<double>(g.space.n));
    detail::put_le(out, static_cast<double>(f.components()));
    detail::put_le(out, static_cast<double>(g.nt));
    for (std::size_t i = 0; i < g.space.n; ++i) detail::put_le(out, static_cast<double>(g.space.nx[i]));
    detail::put_le(out, g.dt);
    for (std::size_t i = 0; i < g.space.n; ++i) detail::put_le(out, g.space.dx[i]);
    detail::put_le(out, g.t0);
    detail::put_le(out, g.space.boundary == Boundary::periodic ? 0.0 : 1.0);
    for (double v : f.values()) detail::put_le(out, v);
    return out;
}

inline Field decode_binary(const std::string& in) {
    std::size_t pos = 0;
    SpaceTimeGrid g;
    g.space.n = detail::get_count(in, pos);
    if (g.space.n != 1 && g.space.n != 2) throw InputError("field binary: bad dimension");
    const std::size_t comps = detail::get_count(in, pos);
    g.nt = detail::get_count(in, pos);
    for (std::size_t i = 0; i < g.space.n; ++i) g.space.nx[i] = detail::get_count(in, pos);
    g.dt = detail::get_le(in, pos);
    for (std::size_t i = 0; i < g.space.n; ++i) g.space.dx[i] = detail::get_le(in, pos);
    g.t0 = detail::get_le(in, pos);
    const double b = detail::get_le(in, pos);
    if (b != 0.0 && b != 1.0) throw InputError("field binary: bad boundary code");
    g.space.boundary = b == 0.0 ? Boundary::periodic : Boundary::dirichlet_zero;
    Field f(g, comps);
    if (in.size() - pos != 8 * f.size()) throw InputError("field binary: payload size mismatch");
    for (double& v : f.values()) v = detail::get_le(in, pos);
    return f;
}

/// Columns t, x (and y), component, value.
inline CsvTable field_csv(const Field& f) {
    const SpaceGrid& s = f.space();
    std::vector<std::string> head{"t", "x"};
    if (s.n == 2) head.push_back("y");
    head.push_back("component");
    head.push_back("value");
    CsvTable t(head);
    for (std::size_t k = 0; k < f.levels(); ++k)
        for (std::size_t j0 = 0; j0 < s.nx[0]; ++j0)
            for (std::size_t j1 = 0; j1 < (s.n == 2 ? s.nx[1] : 1); ++j1)
                for (std::size_t c = 0; c < f.components(); ++c) {
                    auto r = t.row();
                    r << f.grid().time(k) << s.coord(0, j0);
                    if (s.n == 2) r << s.coord(1, j1);
                    r << c << f.at(k, j0, j1, c);
                }
    return t;
}

} // namespace plap
