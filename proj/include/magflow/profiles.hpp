#pragma once
//
// Switch functions with exact plateaus, and the domain-wall profiles built
// from them: field B, mass m, potential V, projection P(y) and density phi.
//

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "magflow/error.hpp"

namespace magflow {

enum class SwitchShape { smooth_bump, linear_ramp };

inline std::string_view to_string(SwitchShape s) {
    return s == SwitchShape::smooth_bump ? "smooth_bump" : "linear_ramp";
}

inline SwitchShape parse_shape(std::string_view s) {
    if (s == "smooth_bump") return SwitchShape::smooth_bump;
    if (s == "linear_ramp") return SwitchShape::linear_ramp;
    throw ConfigError("unknown switch shape '" + std::string(s) + "'");
}

namespace detail {

// s(t) = g(t) / (g(t) + g(1-t)) with g(t) = exp(-1/t) for t > 0, written as
// 1 / (1 + exp(1/t - 1/(1-t))) so that it is monotone in floating point.
inline double bump_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double u = 1.0 / t - 1.0 / (1.0 - t);
    return 1.0 / (1.0 + std::exp(u));
}

inline double bump_step_prime(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double s = bump_step(t);
    const double w = 1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t));
    return s * (1.0 - s) * w;
}

}  // namespace detail

/// A function equal to `lower` for x <= t_lo and `upper` for x >= t_hi.
struct SwitchProfile {
    double lower = 0.0;
    double upper = 1.0;
    double t_lo = -1.0;
    double t_hi = 1.0;
    SwitchShape shape = SwitchShape::smooth_bump;

    static SwitchProfile constant(double value) { return {value, value, -1.0, 1.0, SwitchShape::smooth_bump}; }

    bool valid() const { return t_lo < t_hi && std::isfinite(lower) && std::isfinite(upper); }

    void validate(std::string_view name = "profile") const {
        if (!valid()) throw ConfigError(std::string(name) + ": requires t_lo < t_hi and finite plateaus");
    }

    bool is_constant() const { return lower == upper; }

    double evaluate(double x) const {
        if (x <= t_lo) return lower;
        if (x >= t_hi) return upper;
        const double t = (x - t_lo) / (t_hi - t_lo);
        const double s = shape == SwitchShape::smooth_bump ? detail::bump_step(t) : t;
        return lower + (upper - lower) * s;
    }

    double derivative(double x) const {
        if (x <= t_lo || x >= t_hi) return 0.0;
        const double width = t_hi - t_lo;
        const double t = (x - t_lo) / width;
        const double ds = shape == SwitchShape::smooth_bump ? detail::bump_step_prime(t) : 1.0;
        return (upper - lower) * ds / width;
    }

    double operator()(double x) const { return evaluate(x); }

    double sup_abs() const { return std::max(std::abs(lower), std::abs(upper)); }
};

inline double evaluate(const SwitchProfile& p, double x) { return p.evaluate(x); }
inline double derivative(const SwitchProfile& p, double x) { return p.derivative(x); }

/// The three domain walls of the interface Hamiltonian.
struct ProfileSet {
    SwitchProfile B;
    SwitchProfile m;
    SwitchProfile V;

    void validate() const {
        B.validate("B");
        m.validate("m");
        V.validate("V");
        if (B.lower == 0.0 || B.upper == 0.0) throw ConfigError("B: both plateaus must be nonzero");
    }
};

/// A2(x) = x B(x), the Landau-gauge vector potential.
inline double magnetic_potential(const ProfileSet& ps, double x) { return x * ps.B.evaluate(x); }

/// A2'(x) = B(x) + x B'(x).
inline double magnetic_potential_prime(const ProfileSet& ps, double x) {
    return ps.B.evaluate(x) + x * ps.B.derivative(x);
}

/// sup |A2'| over [-L, L]: plateau values exactly, transition by dense sampling.
inline double sup_A2_prime(const ProfileSet& ps, double L, int samples = 20001) {
    double sup = 0.0;
    if (-L < ps.B.t_lo) sup = std::max(sup, std::abs(ps.B.lower));
    if (L > ps.B.t_hi) sup = std::max(sup, std::abs(ps.B.upper));
    auto scan = [&](double a, double b) {
        if (!(a < b)) return;
        for (int i = 0; i < samples; ++i) {
            const double x = a + (b - a) * i / (samples - 1);
            sup = std::max(sup, std::abs(magnetic_potential_prime(ps, x)));
        }
    };
    scan(-L, L);
    scan(std::max(-L, ps.B.t_lo), std::min(L, ps.B.t_hi));
    return sup;
}

/// phi in S(0, 1; E1, E2): an integrated density of states.
struct DensityProfile {
    SwitchProfile phi{0.0, 1.0, -0.5, 0.5, SwitchShape::smooth_bump};

    static DensityProfile window(double e1, double e2, SwitchShape shape = SwitchShape::smooth_bump) {
        if (!(e1 < e2)) throw ConfigError("density window requires E1 < E2");
        return DensityProfile{SwitchProfile{0.0, 1.0, e1, e2, shape}};
    }

    double E1() const { return phi.t_lo; }
    double E2() const { return phi.t_hi; }
    double value(double e) const { return phi.evaluate(e); }
    double density(double e) const { return phi.derivative(e); }
};

}  // namespace magflow
