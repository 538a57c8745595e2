// Randomized property suites. Standalone: magflow_properties [seed]
//
// Each suite prints one line with its case count and worst deviation and the
// process exits nonzero if any case breaks its tolerance.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magflow/flow.hpp"
#include "magflow/oracle2d.hpp"
#include "magflow/presets.hpp"
#include "random_scenarios.hpp"

using namespace magflow;

namespace {

struct Suite {
    std::string name;
    long cases = 0;
    long violations = 0;
    double worst = 0.0;
    std::string first_failure;

    void check(bool ok, double deviation, const std::string& what) {
        ++cases;
        worst = std::max(worst, deviation);
        if (!ok) {
            if (violations == 0) first_failure = what;
            ++violations;
        }
    }
};

std::vector<double> spectrum(const Eigen::MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

ProfileSet random_walls(std::mt19937_64& rng, bool massless) {
    std::uniform_real_distribution<double> ub(0.5, 4.0), um(-3.0, 3.0), uv(-2.0, 2.0), ut(-2.0, 2.0);
    std::bernoulli_distribution coin(0.5);
    auto profile = [&](double a, double b) {
        double t0 = ut(rng), t1 = ut(rng);
        if (t0 > t1) std::swap(t0, t1);
        return SwitchProfile{a, b, t0, t1 + 0.1, coin(rng) ? SwitchShape::smooth_bump : SwitchShape::linear_ramp};
    };
    ProfileSet ps;
    ps.B = profile((coin(rng) ? 1 : -1) * ub(rng), (coin(rng) ? 1 : -1) * ub(rng));
    ps.m = massless ? SwitchProfile::constant(0.0) : profile(um(rng), um(rng));
    ps.V = massless ? SwitchProfile::constant(0.0) : profile(uv(rng), uv(rng));
    return ps;
}

Grid1D random_grid(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> un(40, 160);
    std::uniform_real_distribution<double> ul(4.0, 12.0);
    std::bernoulli_distribution coin(0.5);
    return {ul(rng), un(rng), coin(rng) ? BoundaryCondition::dirichlet : BoundaryCondition::periodic};
}

Suite hermiticity(std::mt19937_64& rng) {
    Suite s{"hermiticity (bit-exact)"};
    std::uniform_real_distribution<double> uz(-8.0, 8.0), u01(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const auto H = assemble_fiber(random_grid(rng), random_walls(rng, false), uz(rng)).dense();
        const double dev = (H - H.adjoint()).cwiseAbs().maxCoeff();
        s.check(H == H.adjoint(), dev, "fiber case " + std::to_string(t));
    }
    const PerturbationKind kinds[] = {PerturbationKind::mult_x, PerturbationKind::mult_xy, PerturbationKind::decay_y,
                                      PerturbationKind::decay_xy};
    for (int t = 0; t < 8; ++t) {
        Grid2D g;
        g.grid_x = {6.0, 16, BoundaryCondition::dirichlet};
        g.Ly = 8.0 + 8.0 * u01(rng);
        g.Ny = 16;
        PerturbationSpec w{kinds[t % 4], 2.0 * u01(rng) - 1.0, 1.0 + u01(rng), 0.1 + u01(rng)};
        const auto H = assemble_2d(g, random_walls(rng, false), w, u01(rng));
        const double dev = (H - H.adjoint()).cwiseAbs().maxCoeff();
        s.check(H == H.adjoint(), dev, "2d case " + std::to_string(t));
    }
    return s;
}

Suite chiral(std::mt19937_64& rng) {
    Suite s{"chiral symmetry, m = V = 0 (1e-10)"};
    std::uniform_real_distribution<double> uz(-8.0, 8.0);
    for (int t = 0; t < 60; ++t) {
        const auto ev = spectrum(assemble_fiber(random_grid(rng), random_walls(rng, true), uz(rng)).dense());
        double dev = 0.0;
        for (std::size_t k = 0; k < ev.size(); ++k) dev = std::max(dev, std::abs(ev[k] + ev[ev.size() - 1 - k]));
        s.check(dev <= 1e-10, dev, "case " + std::to_string(t));
    }
    return s;
}

Suite vshift(std::mt19937_64& rng) {
    Suite s{"V-shift covariance (1e-12)"};
    std::uniform_real_distribution<double> uz(-8.0, 8.0), uc(-3.0, 3.0);
    for (int t = 0; t < 60; ++t) {
        const auto g = random_grid(rng);
        const auto ps = random_walls(rng, false);
        auto shifted = ps;
        const double c = uc(rng);
        shifted.V.lower += c;
        shifted.V.upper += c;
        const double z = uz(rng);
        const auto a = spectrum(assemble_fiber(g, ps, z).dense());
        const auto b = spectrum(assemble_fiber(g, shifted, z).dense());
        double dev = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) dev = std::max(dev, std::abs(a[k] + c - b[k]));
        s.check(dev <= 1e-12, dev, "case " + std::to_string(t));
    }
    return s;
}

struct Swept {
    std::string label;
    ProfileSet ps;
    EnergyWindow window;
    GapComponent component;
    std::vector<Branch> branches;
};

// alpha and phi independence on one sweep per scenario.
void independence(const std::vector<Swept>& runs, std::mt19937_64& rng, Suite& alpha_suite, Suite& phi_suite) {
    for (const auto& r : runs) {
        // Stay off the component edges (bulk levels) and off the window edges (exit points).
        const double lo = std::max(r.component.lo + 0.1, r.window.lo + 0.3);
        const double hi = std::min(r.component.hi - 0.1, r.window.hi - 0.3);
        const long want = predicted_sf(r.ps, 0.5 * (lo + hi)).sf;
        for (int k = 0; k < 20; ++k) {
            const double a = lo + (hi - lo) * k / 19.0;
            const long sf = spectral_flow(r.branches, a).sf_numeric;
            alpha_suite.check(sf == want, std::abs(double(sf - want)), r.label + " alpha=" + std::to_string(a));
        }
        std::uniform_real_distribution<double> u(lo, hi);
        for (int k = 0; k < 10; ++k) {
            double e1 = u(rng), e2 = u(rng);
            if (e1 > e2) std::swap(e1, e2);
            if (e2 - e1 < 1e-3) e2 = std::min(hi, e1 + 0.05);
            ConductivityParts parts;
            const auto shape = k % 2 ? SwitchShape::linear_ramp : SwitchShape::smooth_bump;
            const double v = conductivity(r.branches, DensityProfile::window(e1, e2, shape), &parts);
            const double dev = std::max(std::abs(v - want), std::abs(parts.integral - want));
            phi_suite.check(dev <= 1e-6, dev, r.label + " phi on [" + std::to_string(e1) + ", " + std::to_string(e2) + "]");
        }
    }
}

Suite mirror(std::mt19937_64& rng) {
    Suite s{"mirror antisymmetry of predicted SF"};
    std::uniform_real_distribution<double> ub(0.5, 4.0), um(-3.0, 3.0), uv(-2.0, 2.0), ua(-6.0, 6.0);
    std::bernoulli_distribution coin(0.5);
    while (s.cases < 1000) {
        HalfSpaceParams a{(coin(rng) ? 1 : -1) * ub(rng), um(rng), uv(rng)};
        HalfSpaceParams b{(coin(rng) ? 1 : -1) * ub(rng), um(rng), uv(rng)};
        const double alpha = ua(rng);
        if (in_bulk_spectrum(a, alpha) || in_bulk_spectrum(b, alpha)) continue;
        const long x = predicted_sf(a, b, alpha).sf, y = predicted_sf(b, a, alpha).sf;
        s.check(x == -y, std::abs(double(x + y)), "alpha=" + std::to_string(alpha));
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    const unsigned long seed = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20240611UL;
    std::mt19937_64 rng(seed);
    std::printf("magflow property suites, seed %lu\n", seed);

    std::vector<Suite> suites;
    suites.push_back(hermiticity(rng));
    suites.push_back(chiral(rng));
    suites.push_back(vshift(rng));

    std::vector<Swept> runs;
    {
        const auto s = find_preset("fig2_top_right");
        const auto minus = minus_side(s.profiles), plus = plus_side(s.profiles);
        auto br = sweep_branches(s.grid, s.profiles, s.sweep, SpuriousFilter::defaults(s.grid));
        for (double a : s.alphas) runs.push_back({s.name, s.profiles, s.sweep.window, component_of(minus, plus, a), br});
    }
    for (int t = 0; t < 3; ++t) {
        const auto c = scenarios::random_case(rng);
        runs.push_back({"random " + std::to_string(t), c.ps, c.sweep.window, c.component,
                        sweep_branches(c.grid, c.ps, c.sweep, SpuriousFilter::defaults(c.grid))});
    }
    Suite alpha_suite{"alpha independence within a gap component"}, phi_suite{"phi independence (1e-6)"};
    independence(runs, rng, alpha_suite, phi_suite);
    suites.push_back(alpha_suite);
    suites.push_back(phi_suite);
    suites.push_back(mirror(rng));

    long bad = 0;
    for (const auto& s : suites) {
        std::printf("%s %-46s cases=%-5ld worst=%.3g", s.violations ? "FAIL" : "PASS", s.name.c_str(), s.cases,
                    s.worst);
        if (s.violations) std::printf("  violations=%ld first: %s", s.violations, s.first_failure.c_str());
        std::printf("\n");
        bad += s.violations;
    }
    return bad ? 1 : 0;
}
