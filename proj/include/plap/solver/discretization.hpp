#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "plap/core/reduce.hpp"
#include "plap/grid/grid.hpp"
#include "plap/orlicz/growth_model.hpp"

namespace plap {

/// Energy-based space discretisation E(u) = sum_e w_e F(G_e u).
///
/// 1D: G_e is the slope on each interval between neighbouring nodes.
/// 2D: every grid cell is cut into two right triangles and G_e is the P1
/// gradient on each, which reduces to the 5-point Laplacian for p = 2.
/// Dirichlet boundary nodes carry the value 0 and are not unknowns.
///
/// -dE/du divided by the node cell measure is the discrete div A(Du); it is
/// the exact negative adjoint of G under the weighted inner products.
class Discretization {
  public:
    static constexpr std::size_t max_local = 3;

    struct Element {
        std::array<long, max_local> node{-1, -1, -1};  // -1: boundary node (value 0)
        std::array<std::array<double, 2>, max_local> beta{};
        std::size_t count = 0;
        double weight = 0.0;
    };

    Discretization(const SpaceGrid& g, std::size_t components) : grid_(g), comps_(components) {
        g.validate();
        if (g.n == 1) build_1d();
        else build_2d();
    }

    const SpaceGrid& grid() const noexcept { return grid_; }
    std::size_t components() const noexcept { return comps_; }
    std::size_t unknowns() const noexcept { return grid_.nodes() * comps_; }
    const std::vector<Element>& elements() const noexcept { return elems_; }
    /// Each node's share of the domain, used as the lumped mass.
    double node_measure() const noexcept { return grid_.cell(); }

    /// G_e u as an N x n row-major block.
    void element_gradient(const Element& e, std::span<const double> u, double* q) const {
        const std::size_t n = grid_.n;
        for (std::size_t k = 0; k < comps_ * n; ++k) q[k] = 0.0;
        for (std::size_t l = 0; l < e.count; ++l) {
            if (e.node[l] < 0) continue;
            const std::size_t base = static_cast<std::size_t>(e.node[l]) * comps_;
            for (std::size_t c = 0; c < comps_; ++c)
                for (std::size_t i = 0; i < n; ++i) q[c * n + i] += e.beta[l][i] * u[base + c];
        }
    }

    /// |G_e u| for every element.
    std::vector<double> gradient_norms(std::span<const double> u, unsigned threads = 1) const {
        std::vector<double> r(elems_.size());
        parallel_for(elems_.size(), threads, [&](std::size_t k) {
            double q[8];
            element_gradient(elems_[k], u, q);
            double s = 0.0;
            for (std::size_t i = 0; i < comps_ * grid_.n; ++i) s += q[i] * q[i];
            r[k] = std::sqrt(s);
        });
        return r;
    }

    double energy(const GrowthModel& model, std::span<const double> u, unsigned threads = 1) const {
        const auto r = gradient_norms(u, threads);
        std::vector<double> terms(elems_.size());
        parallel_for(elems_.size(), threads,
                     [&](std::size_t k) { terms[k] = elems_[k].weight * model.energy_radial(r[k]); });
        return pairwise_sum(terms);
    }

    /// out = dE/du.
    void gradient(const GrowthModel& model, std::span<const double> u, std::span<double> out,
                  unsigned threads = 1) const {
        const std::size_t n = grid_.n, m = comps_ * n;
        std::vector<double> stress(elems_.size() * m);
        parallel_for(elems_.size(), threads, [&](std::size_t k) {
            double q[8];
            element_gradient(elems_[k], u, q);
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += q[i] * q[i];
            const double r = std::sqrt(s);
            const double a = r == 0.0 ? 0.0 : model.diffusivity(r);
            for (std::size_t i = 0; i < m; ++i) stress[k * m + i] = q[i] == 0.0 ? 0.0 : a * q[i];
        });
        for (double& v : out) v = 0.0;
        for (std::size_t k = 0; k < elems_.size(); ++k) {
            const Element& e = elems_[k];
            for (std::size_t l = 0; l < e.count; ++l) {
                if (e.node[l] < 0) continue;
                const std::size_t base = static_cast<std::size_t>(e.node[l]) * comps_;
                for (std::size_t c = 0; c < comps_; ++c) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += stress[k * m + c * n + i] * e.beta[l][i];
                    out[base + c] += e.weight * s;
                }
            }
        }
    }

    /// Triplets of the Hessian of E with the clamped tangent a I + b Q (x) Q.
    void hessian_triplets(const GrowthModel& model, std::span<const double> u, double floor,
                          std::vector<Eigen::Triplet<double>>& out, unsigned threads = 1) const {
        const std::size_t n = grid_.n, m = comps_ * n;
        std::vector<double> qs(elems_.size() * m), ab(elems_.size() * 2);
        parallel_for(elems_.size(), threads, [&](std::size_t k) {
            double* q = &qs[k * m];
            element_gradient(elems_[k], u, q);
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += q[i] * q[i];
            const auto tan = stress_tangent(model, std::sqrt(s), floor);
            ab[2 * k] = tan.a;
            ab[2 * k + 1] = tan.b;
        });
        for (std::size_t k = 0; k < elems_.size(); ++k) {
            const Element& e = elems_[k];
            const double* q = &qs[k * m];
            const double a = ab[2 * k], b = ab[2 * k + 1];
            // proj[l][c] = sum_i Q_ci beta_li
            double proj[max_local][4];
            for (std::size_t l = 0; l < e.count; ++l)
                for (std::size_t c = 0; c < comps_; ++c) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += q[c * n + i] * e.beta[l][i];
                    proj[l][c] = s;
                }
            for (std::size_t l = 0; l < e.count; ++l) {
                if (e.node[l] < 0) continue;
                for (std::size_t l2 = 0; l2 < e.count; ++l2) {
                    if (e.node[l2] < 0) continue;
                    double bb = 0.0;
                    for (std::size_t i = 0; i < n; ++i) bb += e.beta[l][i] * e.beta[l2][i];
                    for (std::size_t c = 0; c < comps_; ++c)
                        for (std::size_t c2 = 0; c2 < comps_; ++c2) {
                            const double v =
                                e.weight * ((c == c2 ? a * bb : 0.0) + b * proj[l][c] * proj[l2][c2]);
                            // zeros kept so the sparsity pattern never changes
                            out.emplace_back(static_cast<int>(e.node[l] * comps_ + c),
                                             static_cast<int>(e.node[l2] * comps_ + c2), v);
                        }
                }
            }
        }
    }

  private:
    long node_id(long j0, long j1) const {
        long j[2] = {j0, j1};
        for (std::size_t i = 0; i < grid_.n; ++i) {
            const long m = static_cast<long>(grid_.nx[i]);
            if (grid_.boundary == Boundary::periodic) {
                j[i] = ((j[i] % m) + m) % m;
            } else if (j[i] < 0 || j[i] >= m) {
                return -1;
            }
        }
        return static_cast<long>(grid_.flat(static_cast<std::size_t>(j[0]), static_cast<std::size_t>(j[1])));
    }

    void build_1d() {
        const long nx = static_cast<long>(grid_.nx[0]);
        const double inv = 1.0 / grid_.dx[0];
        const long first = grid_.boundary == Boundary::periodic ? 0 : -1;
        for (long j = first; j < nx; ++j) {
            Element e;
            e.count = 2;
            e.node = {node_id(j, 0), node_id(j + 1, 0), -1};
            e.beta[0] = {-inv, 0.0};
            e.beta[1] = {inv, 0.0};
            e.weight = grid_.dx[0];
            elems_.push_back(e);
        }
    }

    void build_2d() {
        const long nx = static_cast<long>(grid_.nx[0]), ny = static_cast<long>(grid_.nx[1]);
        const double ix = 1.0 / grid_.dx[0], iy = 1.0 / grid_.dx[1];
        const double w = 0.5 * grid_.dx[0] * grid_.dx[1];
        const long first = grid_.boundary == Boundary::periodic ? 0 : -1;
        for (long j0 = first; j0 < nx; ++j0)
            for (long j1 = first; j1 < ny; ++j1) {
                const long A = node_id(j0, j1), B = node_id(j0 + 1, j1), C = node_id(j0, j1 + 1),
                           D = node_id(j0 + 1, j1 + 1);
                Element lower;
                lower.count = 3;
                lower.node = {A, B, C};
                lower.beta = {{{-ix, -iy}, {ix, 0.0}, {0.0, iy}}};
                lower.weight = w;
                Element upper;
                upper.count = 3;
                upper.node = {D, C, B};
                upper.beta = {{{ix, iy}, {-ix, 0.0}, {0.0, -iy}}};
                upper.weight = w;
                if (A >= 0 || B >= 0 || C >= 0) elems_.push_back(lower);
                if (D >= 0 || C >= 0 || B >= 0) elems_.push_back(upper);
            }
    }

    SpaceGrid grid_;
    std::size_t comps_;
    std::vector<Element> elems_;
};

} // namespace plap
