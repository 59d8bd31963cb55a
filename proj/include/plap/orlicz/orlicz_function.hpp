#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plap/core/error.hpp"

namespace plap {

/// A convex N-function phi with phi'(0) = 0 and phi''(t) t^2 ~ phi(t).
///
///   power      phi(t) = scale * t^p / p
///   max_power  phi(t) = max(t^p, t^q)   (one-sided derivatives at t = 1)
///   carreau    phi(t) = nu_inf t^2 / 2 + nu ((mu^2 + t^2)^{p/2} - mu^p) / p,
///              so that phi'(t) t^{-1} = nu_inf + nu (mu^2 + t^2)^{(p-2)/2}
class OrliczFunction {
  public:
    enum class Kind { power, max_power, carreau };

    static OrliczFunction power(double p, double scale = 1.0) {
        if (!(p > 1.0) || !std::isfinite(p)) throw InputError("power: need p > 1");
        if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("power: need scale > 0");
        OrliczFunction f;
        f.kind_ = Kind::power;
        f.p_ = p;
        f.scale_ = scale;
        return f;
    }

    static OrliczFunction max_power(double p, double q) {
        if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q))
            throw InputError("max_power: need p, q > 1");
        OrliczFunction f;
        f.kind_ = Kind::max_power;
        f.p_ = std::min(p, q);
        f.q_ = std::max(p, q);
        return f;
    }

    static OrliczFunction carreau(double p, double nu, double nu_inf, double mu) {
        if (!(p > 1.0) || !std::isfinite(p)) throw InputError("carreau: need p > 1");
        if (!(nu > 0.0) || !(nu_inf >= 0.0) || !(mu >= 0.0))
            throw InputError("carreau: need nu > 0, nu_inf >= 0, mu >= 0");
        OrliczFunction f;
        f.kind_ = Kind::carreau;
        f.p_ = p;
        f.nu_ = nu;
        f.nu_inf_ = nu_inf;
        f.mu_ = mu;
        return f;
    }

    Kind kind() const noexcept { return kind_; }
    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    double scale() const noexcept { return scale_; }
    double nu() const noexcept { return nu_; }
    double nu_inf() const noexcept { return nu_inf_; }
    double mu() const noexcept { return mu_; }
    /// Point where phi' jumps (max_power at t = 1), or a negative value.
    double kink() const noexcept { return kind_ == Kind::max_power ? 1.0 : -1.0; }

    double value(double t) const {
        check_arg(t);
        switch (kind_) {
        case Kind::power:
            return scale_ * std::pow(t, p_) / p_;
        case Kind::max_power:
            return t < 1.0 ? std::pow(t, p_) : std::pow(t, q_);
        case Kind::carreau:
            return 0.5 * nu_inf_ * t * t +
                   nu_ * (std::pow(mu_ * mu_ + t * t, 0.5 * p_) - std::pow(mu_, p_)) / p_;
        }
        return 0.0;
    }

    double d1(double t) const {
        check_arg(t);
        switch (kind_) {
        case Kind::power:
            return t == 0.0 ? 0.0 : scale_ * std::pow(t, p_ - 1.0);
        case Kind::max_power:
            if (t == 0.0) return 0.0;
            return t < 1.0 ? p_ * std::pow(t, p_ - 1.0) : q_ * std::pow(t, q_ - 1.0);
        case Kind::carreau:
            return t * carreau_weight(t);
        }
        return 0.0;
    }

    /// phi''(t); +inf at t = 0 when the growth is singular there (p < 2).
    double d2(double t) const {
        check_arg(t);
        switch (kind_) {
        case Kind::power:
            return scale_ * (p_ - 1.0) * pow_at_zero(t, p_ - 2.0);
        case Kind::max_power:
            return t < 1.0 ? p_ * (p_ - 1.0) * pow_at_zero(t, p_ - 2.0)
                           : q_ * (q_ - 1.0) * std::pow(t, q_ - 2.0);
        case Kind::carreau: {
            const double s = mu_ * mu_ + t * t;
            if (s == 0.0) return nu_inf_ + (p_ < 2.0 ? inf() : (p_ == 2.0 ? nu_ : 0.0));
            return nu_inf_ + nu_ * std::pow(s, 0.5 * p_ - 2.0) * (mu_ * mu_ + (p_ - 1.0) * t * t);
        }
        }
        return 0.0;
    }

    /// phi*(s) = sup_{a > 0} (a s - phi(a)).
    double conjugate(double s) const {
        if (!std::isfinite(s)) throw InputError("conjugate: non-finite argument");
        if (s <= 0.0) return 0.0;
        if (kind_ == Kind::power) {
            const double pc = p_ / (p_ - 1.0);
            return std::pow(scale_, -1.0 / (p_ - 1.0)) * std::pow(s, pc) / pc;
        }
        const double a = maximiser(s);
        return std::max(0.0, a * s - value(a));
    }

    /// The point a* where a s - phi(a) peaks: sup{a : phi'(a) <= s}. Found by
    /// bracketing and bisection on the monotone derivative.
    double maximiser(double s) const {
        if (s <= 0.0) return 0.0;
        double lo = 0.0;
        double hi = 1.0;
        int expansions = 0;
        while (d1(hi) <= s) {
            lo = hi;
            hi *= 2.0;
            if (++expansions > 2000 || !std::isfinite(hi))
                throw NumericError("conjugate: could not bracket the maximiser", hi, s);
        }
        for (int it = 0; it < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi;
             ++it) {
            const double mid = 0.5 * (lo + hi);
            if (d1(mid) <= s)
                lo = mid;
            else
                hi = mid;
        }
        if (hi - lo > 1e-12 * std::max(1.0, hi))
            throw NumericError("conjugate: bisection did not converge", lo, hi - lo);
        return 0.5 * (lo + hi);
    }

    std::string describe() const {
        switch (kind_) {
        case Kind::power:
            return "power(p=" + std::to_string(p_) + ",scale=" + std::to_string(scale_) + ")";
        case Kind::max_power:
            return "max_power(p=" + std::to_string(p_) + ",q=" + std::to_string(q_) + ")";
        case Kind::carreau:
            return "carreau(p=" + std::to_string(p_) + ",nu=" + std::to_string(nu_) +
                   ",nu_inf=" + std::to_string(nu_inf_) + ",mu=" + std::to_string(mu_) + ")";
        }
        return "?";
    }

  private:
    OrliczFunction() = default;

    static double inf() { return std::numeric_limits<double>::infinity(); }

    static void check_arg(double t) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("Orlicz function: need finite t >= 0");
    }

    static double pow_at_zero(double t, double e) {
        if (t == 0.0) return e < 0.0 ? inf() : (e == 0.0 ? 1.0 : 0.0);
        return std::pow(t, e);
    }

    double carreau_weight(double t) const {
        const double s = mu_ * mu_ + t * t;
        if (s == 0.0) return nu_inf_ + (p_ < 2.0 ? inf() : (p_ == 2.0 ? nu_ : 0.0));
        return nu_inf_ + nu_ * std::pow(s, 0.5 * p_ - 1.0);
    }

    Kind kind_ = Kind::power;
    double p_ = 2.0;
    double q_ = 2.0;
    double scale_ = 1.0;
    double nu_ = 1.0;
    double nu_inf_ = 0.0;
    double mu_ = 0.0;
};

struct Delta2Envelope {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    std::size_t samples = 0;
};

/// min / max of phi''(t) t^2 / phi(t) over a log-spaced grid on [t_min, t_max].
inline Delta2Envelope delta2_envelope(const OrliczFunction& phi, double t_min = 1e-6,
                                      double t_max = 1e6, std::size_t count = 2001) {
    Delta2Envelope env{std::numeric_limits<double>::infinity(), 0.0, count};
    const double l0 = std::log(t_min);
    const double l1 = std::log(t_max);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (count - 1));
        const double r = phi.d2(t) * t * t / phi.value(t);
        env.min_ratio = std::min(env.min_ratio, r);
        env.max_ratio = std::max(env.max_ratio, r);
    }
    return env;
}

} // namespace plap
