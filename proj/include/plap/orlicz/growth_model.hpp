#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "plap/core/error.hpp"
#include "plap/core/matrix.hpp"
#include "plap/core/quadrature.hpp"
#include "plap/orlicz/orlicz_function.hpp"

namespace plap {

/// Uhlenbeck-type nonlinearity A(Q) = a(|Q|) Q with energy F(Q) = F(|Q|),
/// F' = A and F(0) = 0. Shared structure:
///
///   p_growth:  a(r) = (mu^2 + r^2)^{(p-2)/2}
///   orlicz:    a(r) = phi'(mu + r) / (mu + r)
///
/// V(Q) = sqrt(a(|Q|)) Q in both cases, which gives the p-growth V exactly.
class GrowthModel {
  public:
    enum class Variant { p_growth, orlicz };

    static GrowthModel p_growth(double p, double mu = 0.0) {
        if (!(p > 1.0) || !std::isfinite(p)) throw InputError("p_growth: need p > 1");
        if (!(mu >= 0.0) || !std::isfinite(mu)) throw InputError("p_growth: need mu >= 0");
        return GrowthModel(Variant::p_growth, OrliczFunction::power(p), p, mu);
    }

    static GrowthModel orlicz(OrliczFunction phi, double mu = 0.0) {
        if (!(mu >= 0.0) || !std::isfinite(mu)) throw InputError("orlicz: need mu >= 0");
        const double p = phi.p();
        return GrowthModel(Variant::orlicz, phi, p, mu);
    }

    Variant variant() const noexcept { return variant_; }
    double p() const noexcept { return p_; }
    double mu() const noexcept { return mu_; }
    /// phi for Orlicz models, t^p / p for p-growth ones.
    const OrliczFunction& phi() const noexcept { return phi_; }

    /// a(r) such that A(Q) = a(|Q|) Q. Infinite at r = 0 for singular growth.
    double diffusivity(double r) const {
        if (variant_ == Variant::p_growth) {
            if (mu_ == 0.0) return pow0(r, p_ - 2.0);
            return std::pow(mu_ * mu_ + r * r, 0.5 * (p_ - 2.0));
        }
        const double t = mu_ + r;
        if (t == 0.0) return phi_.d2(0.0);
        return phi_.d1(t) / t;
    }

    /// d/dr (a(r) r), the eigenvalue of D_Q A in the direction of Q.
    double radial_stiffness(double r) const {
        if (variant_ == Variant::p_growth) {
            if (mu_ == 0.0) return (p_ - 1.0) * pow0(r, p_ - 2.0);
            const double s = mu_ * mu_ + r * r;
            return std::pow(s, 0.5 * (p_ - 4.0)) * (mu_ * mu_ + (p_ - 1.0) * r * r);
        }
        const double t = mu_ + r;
        if (t == 0.0) return phi_.d2(0.0);
        return phi_.d2(t) * r / t + phi_.d1(t) * mu_ / (t * t);
    }

    /// phi''(mu + |Q| + |Q - P|)-type weight used by the two-sided monotonicity bound.
    double shifted_phi_dd(double t) const { return phi_.d2(t); }

    /// F as a function of r = |Q|. Closed forms for p-growth, ((mu^2 + r^2)^{p/2} - mu^p) / p,
    /// and for unshifted Orlicz models, phi(r); otherwise int_0^r a(s) s ds by quadrature.
    double energy_radial(double r) const {
        if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("energy: need finite |Q|");
        if (r == 0.0) return 0.0;
        if (variant_ == Variant::p_growth) {
            if (mu_ == 0.0) return std::pow(r, p_) / p_;
            const double x = r / mu_;
            return std::pow(mu_, p_) * std::expm1(0.5 * p_ * std::log1p(x * x)) / p_;
        }
        if (mu_ == 0.0) return phi_.value(r);
        auto integrand = [this](double s) { return s == 0.0 ? 0.0 : diffusivity(s) * s; };
        const double k = phi_.kink() - mu_;
        if (k > 0.0 && k < r) {
            const double head = integrate_adaptive(integrand, 0.0, k, 1e-12, 1e-300, "energy_F").value;
            return head + integrate_adaptive(integrand, k, r, 1e-12, head, "energy_F").value;
        }
        return integrate_adaptive(integrand, 0.0, r, 1e-12, 1e-300, "energy_F").value;
    }

    Mat stress(const Mat& q) const {
        require_finite(q, "stress_A");
        const double r = norm(q);
        if (r == 0.0) return Mat(q.rows(), q.cols());
        return q * diffusivity(r);
    }

    Mat v_map(const Mat& q) const {
        require_finite(q, "v_map");
        const double r = norm(q);
        if (r == 0.0) return Mat(q.rows(), q.cols());
        return q * std::sqrt(diffusivity(r));
    }

    double energy(const Mat& q) const {
        require_finite(q, "energy_F");
        return energy_radial(norm(q));
    }

    /// phi(t) in the growth sense: t^p / p for p-growth, phi(t) otherwise.
    double growth(double t) const { return phi_.value(t); }
    double growth_conjugate(double s) const { return phi_.conjugate(s); }

    std::string describe() const {
        if (variant_ == Variant::p_growth)
            return "p_growth(p=" + std::to_string(p_) + ",mu=" + std::to_string(mu_) + ")";
        return "orlicz(" + phi_.describe() + ",mu=" + std::to_string(mu_) + ")";
    }

  private:
    GrowthModel(Variant v, OrliczFunction phi, double p, double mu)
        : variant_(v), phi_(phi), p_(p), mu_(mu) {}

    static double pow0(double r, double e) {
        if (r == 0.0) return e < 0.0 ? std::numeric_limits<double>::infinity() : (e == 0.0 ? 1.0 : 0.0);
        return std::pow(r, e);
    }

    static void require_finite(const Mat& q, const char* what) {
        if (!q.all_finite()) throw InputError(std::string(what) + ": non-finite entries");
    }

    Variant variant_;
    OrliczFunction phi_;
    double p_;
    double mu_;
};

/// Eigen-structure of D_Q A(Q) = a I + b Q (x) Q with both eigenvalues clamped
/// to [floor, 1 / floor]. `floor` = 0 disables clamping.
struct StressTangent {
    double a = 0.0;
    double b = 0.0;
};

inline StressTangent stress_tangent(const GrowthModel& model, double r, double floor) {
    const double hi = floor > 0.0 ? 1.0 / floor : std::numeric_limits<double>::infinity();
    auto clamp = [&](double v) { return std::min(std::max(v, floor), hi); };
    const double a = clamp(model.diffusivity(r));
    if (r == 0.0) return {a, 0.0};
    const double lr = clamp(model.radial_stiffness(r));
    return {a, (lr - a) / (r * r)};
}

} // namespace plap
