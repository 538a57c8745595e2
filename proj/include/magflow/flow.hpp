#pragma once
//
// Spectral flow through a level alpha, the conductivity 2 pi sigma_I from a
// density profile, and their reconciliation with the bulk prediction.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "magflow/branches.hpp"
#include "magflow/bulk.hpp"
#include "magflow/error.hpp"
#include "magflow/fiber.hpp"
#include "magflow/profiles.hpp"

namespace magflow {

enum class Direction { up, down };

inline std::string_view to_string(Direction d) { return d == Direction::up ? "up" : "down"; }

struct Crossing {
    int branch_id = 0;
    double zeta = 0.0;
    Direction direction = Direction::up;
    bool refined = false;
};

struct FlowReport {
    double alpha = 0.0;
    double alpha_used = 0.0;  // differs from alpha when a sample sat on alpha
    int alpha_shifts = 0;
    long sf_numeric = 0;
    long sf_endpoint = 0;
    std::optional<long> sf_predicted;
    double two_pi_sigma = std::numeric_limits<double>::quiet_NaN();
    double two_pi_sigma_integral = std::numeric_limits<double>::quiet_NaN();
    std::vector<Crossing> crossings;
    bool window_valid = false;

    long ups() const { return std::count_if(crossings.begin(), crossings.end(), [](auto& c) { return c.direction == Direction::up; }); }
    long downs() const { return static_cast<long>(crossings.size()) - ups(); }
};

/// Fresh eigensolves for locating crossings beyond the sample spacing.
struct CrossingRefiner {
    Grid1D grid;
    ProfileSet ps;
    double tol = 1e-6;
};

inline constexpr double kNodeTol = 1e-12;
inline constexpr double kAlphaShift = 1e-9;
inline constexpr double kWindowMargin = 0.05;

namespace detail {

inline Eigen::VectorXcd state_near(const CrossingRefiner& r, double zeta, double mu, double* got_mu) {
    auto pairs = eig_window(assemble_fiber(r.grid, r.ps, zeta), {mu - 1e-7, mu + 1e-7});
    if (pairs.empty()) return {};
    auto best = std::min_element(pairs.begin(), pairs.end(),
                                 [&](auto& a, auto& b) { return std::abs(a.mu - mu) < std::abs(b.mu - mu); });
    *got_mu = best->mu;
    return best->psi;
}

// Bisection in zeta between two samples bracketing alpha, following the state by overlap.
inline std::optional<double> refine_crossing(const CrossingRefiner& r, double za, double mua, double zb, double alpha) {
    double mu = 0.0;
    Eigen::VectorXcd psi = state_near(r, za, mua, &mu);
    if (psi.size() == 0) return std::nullopt;
    const int side = sgn(mu - alpha);
    double a = za, b = zb;
    while (std::abs(b - a) > r.tol) {
        const double m = 0.5 * (a + b);
        const double reach = std::abs(m - a) + 1e-8;
        auto pairs = eig_window(assemble_fiber(r.grid, r.ps, m), {mu - reach, mu + reach});
        double best = 0.0;
        int pick = -1;
        for (int k = 0; k < static_cast<int>(pairs.size()); ++k) {
            const double o = std::abs(psi.dot(pairs[k].psi));
            if (o > best) {
                best = o;
                pick = k;
            }
        }
        if (pick < 0 || best < 0.5) return std::nullopt;
        if (sgn(pairs[pick].mu - alpha) == side) {
            a = m;
            mu = pairs[pick].mu;
            psi = pairs[pick].psi;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

inline bool touches_node(const std::vector<Branch>& branches, double alpha) {
    for (const auto& b : branches)
        for (double mu : b.mus)
            if (std::abs(mu - alpha) <= kNodeTol) return true;
    return false;
}

}  // namespace detail

/// Signed count of branch crossings through alpha (up minus down).
inline FlowReport spectral_flow(const std::vector<Branch>& branches, double alpha, double margin = kWindowMargin,
                                const CrossingRefiner* refiner = nullptr) {
    FlowReport rep;
    rep.alpha = alpha;
    rep.window_valid = validate_window(branches, alpha, margin);
    if (!rep.window_valid) {
        std::ostringstream os;
        os << "window invalid at alpha=" << alpha << ": a branch endpoint lies within " << margin;
        throw WindowError(os.str());
    }
    double a = alpha;
    while (detail::touches_node(branches, a)) {
        a += kAlphaShift;
        ++rep.alpha_shifts;
    }
    rep.alpha_used = a;
    for (const auto& br : branches) {
        for (std::size_t k = 0; k + 1 < br.size(); ++k) {
            const int s0 = sgn(br.mus[k] - a), s1 = sgn(br.mus[k + 1] - a);
            if (s0 == s1) continue;
            Crossing c;
            c.branch_id = br.id;
            c.direction = s1 > 0 ? Direction::up : Direction::down;
            const double t = (a - br.mus[k]) / (br.mus[k + 1] - br.mus[k]);
            c.zeta = br.zetas[k] + t * (br.zetas[k + 1] - br.zetas[k]);
            if (refiner) {
                if (auto z = detail::refine_crossing(*refiner, br.zetas[k], br.mus[k], br.zetas[k + 1], a)) {
                    c.zeta = *z;
                    c.refined = true;
                }
            }
            rep.crossings.push_back(c);
        }
        if (br.size() >= 2) {
            const bool below0 = br.mus.front() < a, below1 = br.mus.back() < a;
            if (below0 && !below1) ++rep.sf_endpoint;
            if (!below0 && below1) --rep.sf_endpoint;
        }
    }
    rep.sf_numeric = rep.ups() - rep.downs();
    if (rep.sf_numeric != rep.sf_endpoint) {
        std::ostringstream os;
        os << "crossing count " << rep.sf_numeric << " disagrees with endpoint count " << rep.sf_endpoint;
        throw SolverError(os.str());
    }
    return rep;
}

struct ConductivityParts {
    double endpoint_sum = 0.0;
    double integral = 0.0;
};

namespace detail {

// Hermite cubic through (mu0, v0) and (mu1, v1) on a step of length h, in t in [0, 1].
struct Hermite {
    double mu0, mu1, d0, d1;  // d = h * v

    double value(double t) const {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * mu0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * mu1 + (t3 - t2) * d1;
    }
    double slope(double t) const {
        const double t2 = t * t;
        return (6 * t2 - 6 * t) * mu0 + (3 * t2 - 4 * t + 1) * d0 + (-6 * t2 + 6 * t) * mu1 + (3 * t2 - 2 * t) * d1;
    }
};

}  // namespace detail

/// 2 pi sigma_I = sum_j phi(mu_j(end)) - phi(mu_j(start)), checked against the integral of d/dzeta phi(mu_j).
inline double conductivity(const std::vector<Branch>& branches, const DensityProfile& dens,
                           ConductivityParts* parts = nullptr) {
    const double e1 = dens.E1(), e2 = dens.E2();
    for (const auto& b : branches) {
        if (b.size() == 0) continue;
        for (double mu : {b.mus.front(), b.mus.back()}) {
            if (mu > e1 && mu < e2) {
                std::ostringstream os;
                os << "phi window touches branch endpoint: branch " << b.id << " mu=" << mu << " in (" << e1 << ", "
                   << e2 << ")";
                throw WindowError(os.str());
            }
        }
    }
    ConductivityParts p;
    for (const auto& b : branches) {
        if (b.size() == 0) continue;
        p.endpoint_sum += dens.value(b.mus.back()) - dens.value(b.mus.front());
        for (std::size_t k = 0; k + 1 < b.size(); ++k) {
            const double h = b.zetas[k + 1] - b.zetas[k];
            const detail::Hermite c{b.mus[k], b.mus[k + 1], h * b.velocities[k], h * b.velocities[k + 1]};
            // The cubic stays within (4/27)(|d0| + |d1|) of the chord.
            const double pad = (4.0 / 27.0) * (std::abs(c.d0) + std::abs(c.d1)) + 1e-12;
            if (std::max(c.mu0, c.mu1) + pad <= e1 || std::min(c.mu0, c.mu1) - pad >= e2) continue;
            auto f = [&](double t) { return dens.density(c.value(t)) * c.slope(t); };
            // phi' may have kinks at E1, E2 (linear ramp); integrate between the crossings.
            std::vector<double> cuts{0.0};
            for (double e : {e1, e2}) {
                constexpr int kProbe = 64;
                for (int q = 0; q < kProbe; ++q) {
                    double a = double(q) / kProbe, b = double(q + 1) / kProbe;
                    if ((c.value(a) - e) * (c.value(b) - e) >= 0.0) continue;
                    for (int it = 0; it < 60; ++it) {
                        const double m = 0.5 * (a + b);
                        ((c.value(a) - e) * (c.value(m) - e) <= 0.0 ? b : a) = m;
                    }
                    cuts.push_back(0.5 * (a + b));
                }
            }
            cuts.push_back(1.0);
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t q = 0; q + 1 < cuts.size(); ++q)
                if (cuts[q + 1] > cuts[q])
                    p.integral +=
                        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[q], cuts[q + 1], 20, 1e-13);
        }
    }
    if (std::abs(p.integral - p.endpoint_sum) > 1e-6) {
        std::ostringstream os;
        os << "conductivity endpoint sum " << p.endpoint_sum << " disagrees with integral form " << p.integral;
        throw SolverError(os.str());
    }
    if (parts) *parts = p;
    return p.endpoint_sum;
}

/// Both the crossing count and the rounded conductivity equal the predicted flow.
inline bool reconcile(const FlowReport& report, const FlowPrediction& pred) {
    if (report.sf_numeric != pred.sf) return false;
    if (!std::isfinite(report.two_pi_sigma)) return false;
    return std::lround(report.two_pi_sigma) == pred.sf;
}

/// The gap component of rho(H-) and rho(H+) containing alpha.
inline GapComponent component_of(const HalfSpaceParams& minus, const HalfSpaceParams& plus, double alpha,
                                 double reach = 20.0) {
    for (auto c : gap_components(minus, plus, alpha - reach, alpha + reach))
        if (alpha > c.lo && alpha < c.hi) return c;
    std::ostringstream os;
    os << "alpha in bulk spectrum: " << alpha;
    throw BulkLevelError(os.str());
}

/// phi switching on (E1, E2) around alpha, kept a quarter of the way away from the gap edges.
inline DensityProfile density_around(const HalfSpaceParams& minus, const HalfSpaceParams& plus, double alpha,
                                     double half_width = 0.5) {
    const auto c = component_of(minus, plus, alpha);
    const double e1 = std::max(alpha - half_width, c.lo + 0.25 * (alpha - c.lo));
    const double e2 = std::min(alpha + half_width, c.hi - 0.25 * (c.hi - alpha));
    return DensityProfile::window(e1, e2);
}

/// Numerical flow, conductivity and prediction for one alpha.
inline FlowReport analyze_flow(const std::vector<Branch>& branches, const ProfileSet& ps, double alpha,
                               const DensityProfile& dens, double margin = kWindowMargin,
                               const CrossingRefiner* refiner = nullptr) {
    FlowReport rep = spectral_flow(branches, alpha, margin, refiner);
    rep.sf_predicted = predicted_sf(ps, alpha).sf;
    ConductivityParts parts;
    rep.two_pi_sigma = conductivity(branches, dens, &parts);
    rep.two_pi_sigma_integral = parts.integral;
    return rep;
}

}  // namespace magflow
