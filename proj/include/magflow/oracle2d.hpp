#pragma once
//
// Brute-force 2D check of sigma_I = Tr i[H, P] phi'(H) on a small periodic-in-y
// grid, plus stability runs under added potentials W.
//
// x uses the same forward/backward stencil as the fiber. y is periodic with a
// spectral derivative restricted to Ny consecutive Fourier modes
// zeta_n = 2 pi n / Ly, n = n_hi - Ny + 1 .. n_hi, so each Fourier block of the
// unperturbed matrix is exactly the fiber matrix at zeta_n.
//
// Index of psi_s(x_i, y_j): 2 (j N + i) + s.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magflow/error.hpp"
#include "magflow/fiber.hpp"
#include "magflow/lapack.hpp"
#include "magflow/parallel.hpp"
#include "magflow/profiles.hpp"

namespace magflow {

struct Grid2D {
    Grid1D grid_x{12.0, 48, BoundaryCondition::dirichlet};
    double Ly = 24.0;
    int Ny = 32;
    int max_dim = 6000;  // dense-solve budget

    int dim() const { return 2 * grid_x.N * Ny; }
    double hy() const { return Ly / Ny; }
    double y(int j) const { return -0.5 * Ly + hy() * j; }
    double dzeta() const { return 2.0 * std::numbers::pi / Ly; }

    /// Top of the mode band: below the y Nyquist momentum and one unit below
    /// the x-stencil's second zero at zeta - A2 = 2/h_x.
    double zeta_top() const { return std::min(std::numbers::pi / hy(), 2.0 / grid_x.h() - 1.0); }
    long n_hi() const { return static_cast<long>(std::floor(zeta_top() / dzeta())); }
    long n_lo() const { return n_hi() - Ny + 1; }
    double zeta_mode(int q) const { return dzeta() * static_cast<double>(n_lo() + q); }

    void validate() const {
        grid_x.validate();
        if (!(Ly > 0.0)) throw ConfigError("grid2d: Ly must be positive");
        if (Ny < 16) throw ConfigError("grid2d: Ny must be >= 16");
        if (dim() > max_dim) {
            std::ostringstream os;
            os << "dense budget exceeded: dimension " << dim() << " > " << max_dim;
            throw BudgetError(os.str());
        }
    }
};

enum class PerturbationKind { mult_x, mult_xy, decay_y, decay_xy };

inline std::string_view to_string(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::mult_x: return "mult_x";
        case PerturbationKind::mult_xy: return "mult_xy";
        case PerturbationKind::decay_y: return "decay_y";
        default: return "decay_xy";
    }
}

inline PerturbationKind parse_perturbation(std::string_view s) {
    if (s == "mult_x") return PerturbationKind::mult_x;
    if (s == "mult_xy") return PerturbationKind::mult_xy;
    if (s == "decay_y") return PerturbationKind::decay_y;
    if (s == "decay_xy") return PerturbationKind::decay_xy;
    throw ConfigError("unknown perturbation kind '" + std::string(s) + "'");
}

/// W added as coupling * W(x, y) sigma_0.
///   mult_x   amplitude * b(x / support)
///   mult_xy  amplitude * b(x / support) b(y / support)
///   decay_y  amplitude * <y>^(-1-delta)
///   decay_xy amplitude * <x,y>^(-2-delta)
/// with the compact bump b(t) = exp(1 - 1/(1 - t^2)) on |t| < 1.
struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::mult_x;
    double amplitude = 0.5;
    double support = 2.0;
    double delta = 0.5;

    void validate() const {
        if (!std::isfinite(amplitude)) throw ConfigError("perturbation: amplitude must be finite");
        if ((kind == PerturbationKind::mult_x || kind == PerturbationKind::mult_xy) && !(support > 0.0))
            throw ConfigError("perturbation: support must be positive");
        if ((kind == PerturbationKind::decay_y || kind == PerturbationKind::decay_xy) && !(delta > 0.0))
            throw ConfigError("perturbation: decay kinds need delta > 0");
    }

    double operator()(double x, double y) const {
        auto bump = [](double t) { return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0; };
        switch (kind) {
            case PerturbationKind::mult_x: return amplitude * bump(x / support);
            case PerturbationKind::mult_xy: return amplitude * bump(x / support) * bump(y / support);
            case PerturbationKind::decay_y: return amplitude * std::pow(1.0 + y * y, -0.5 * (1.0 + delta));
            default: return amplitude * std::pow(1.0 + x * x + y * y, -0.5 * (2.0 + delta));
        }
    }
};

/// Spectral D_y on the periodic grid: F^dagger diag(zeta_n) F.
inline Eigen::MatrixXcd spectral_dy(const Grid2D& g) {
    const int ny = g.Ny;
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(ny, ny);
    for (int j = 0; j < ny; ++j) {
        for (int k = 0; k < ny; ++k) {
            cplx acc = 0.0;
            for (int q = 0; q < ny; ++q) {
                const double z = g.zeta_mode(q);
                acc += z * std::polar(1.0, z * (g.y(j) - g.y(k)));
            }
            D(j, k) = acc / static_cast<double>(ny);
        }
    }
    // Exact Hermitian symmetry.
    for (int j = 0; j < ny; ++j) {
        D(j, j) = D(j, j).real();
        for (int k = j + 1; k < ny; ++k) D(k, j) = std::conj(D(j, k));
    }
    return D;
}

inline Eigen::Index index2d(const Grid2D& g, int i, int j, int s) {
    return 2 * (static_cast<Eigen::Index>(j) * g.grid_x.N + i) + s;
}

inline Eigen::MatrixXcd assemble_2d(const Grid2D& g, const ProfileSet& ps, const std::optional<PerturbationSpec>& w,
                                    double coupling) {
    g.validate();
    if (!(coupling >= 0.0 && coupling <= 1.0)) throw ConfigError("assemble_2d: coupling must lie in [0, 1]");
    if (w) w->validate();
    const int nx = g.grid_x.N, ny = g.Ny;
    const FiberMatrix f0 = assemble_fiber(g.grid_x, ps, 0.0);
    const Eigen::MatrixXcd D = spectral_dy(g);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(g.dim(), g.dim());
    const cplx I(0.0, 1.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            for (int s = 0; s < 2; ++s) {
                double d = f0.diag[2 * i + s];
                if (w) d += coupling * (*w)(g.grid_x.x(i), g.y(j));
                H(index2d(g, i, j, s), index2d(g, i, j, s)) = d;
            }
            const auto a = index2d(g, i, j, 0);
            const auto b = index2d(g, i, j, 1);
            H(a, b) += f0.t_on[i];
            H(b, a) += std::conj(f0.t_on[i]);
        }
        for (int i = 0; i < static_cast<int>(f0.t_next.size()); ++i) {
            const int i1 = (i + 1) % nx;
            const auto a = index2d(g, i, j, 0);
            const auto b = index2d(g, i1, j, 1);
            H(a, b) += f0.t_next[i];
            H(b, a) += std::conj(f0.t_next[i]);
        }
    }
    // -i D_y couples psi1(x, y_j) to psi2(x, y_k).
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            for (int k = 0; k < ny; ++k) {
                const cplx c = -I * D(j, k);
                if (c == cplx{}) continue;
                const auto a = index2d(g, i, j, 0);
                const auto b = index2d(g, i, k, 1);
                H(a, b) += c;
                H(b, a) += std::conj(c);
            }
        }
    }
    return H;
}

/// Cell average of P' on the y grid; sums to (P(top) - P(bottom)) / h_y.
inline std::vector<double> projection_density(const Grid2D& g, const SwitchProfile& P) {
    std::vector<double> out(g.Ny);
    const double h = g.hy();
    for (int j = 0; j < g.Ny; ++j) out[j] = (P.evaluate(g.y(j) + 0.5 * h) - P.evaluate(g.y(j) - 0.5 * h)) / h;
    return out;
}

/// P switching from 0 to 1 on (t_lo, t_hi) must stay at least Ly/4 away from the seam at y = +-Ly/2.
inline void check_seam(const Grid2D& g, const SwitchProfile& P) {
    if (P.t_lo < -0.25 * g.Ly || P.t_hi > 0.25 * g.Ly) {
        std::ostringstream os;
        os << "seam violation: P transition (" << P.t_lo << ", " << P.t_hi << ") must lie within |y| <= "
           << 0.25 * g.Ly;
        throw ConfigError(os.str());
    }
    if (P.lower != 0.0 || P.upper != 1.0) throw ConfigError("P must switch from 0 to 1");
}

struct TraceDetail {
    double sigma = 0.0;           // analytic form sum phi'(l) <v, P' s2 v>
    double sigma_shifted = 0.0;   // P' moved by Ly/2
    double sigma_literal = 0.0;   // Tr chi i[H, P_grid] phi'(H), chi = 1{|y| < Ly/4}
    int states = 0;               // eigenpairs in (E1, E2)
    double seam_residual() const { return 2.0 * std::numbers::pi * std::abs(sigma - sigma_shifted); }
    double literal_difference() const { return 2.0 * std::numbers::pi * std::abs(sigma - sigma_literal); }
};

/// Dense eigenpairs of H with eigenvalues in the support of phi'.
inline lapack::ComplexWindowResult window_spectrum(const Eigen::MatrixXcd& H, const DensityProfile& dens) {
    Eigen::MatrixXcd work = H;
    return lapack::hermitian_window(work, dens.E1(), dens.E2());
}

/// sigma_I from precomputed window eigenpairs of H.
inline double trace_conductivity(const lapack::ComplexWindowResult& spec, const Eigen::MatrixXcd& H, const Grid2D& g,
                                 const SwitchProfile& P, const DensityProfile& dens, TraceDetail* detail = nullptr) {
    check_seam(g, P);
    if (H.rows() != g.dim() || H.cols() != g.dim()) throw ConfigError("trace_conductivity: matrix does not match grid");
    const int nx = g.grid_x.N, ny = g.Ny;
    const auto dp = projection_density(g, P);
    TraceDetail t;
    t.states = static_cast<int>(spec.values.size());
    std::vector<double> pgrid(ny), chi(ny);
    for (int j = 0; j < ny; ++j) {
        pgrid[j] = P.evaluate(g.y(j));
        chi[j] = std::abs(g.y(j)) < 0.25 * g.Ly ? 1.0 : 0.0;
    }
    const cplx I(0.0, 1.0);
    for (int k = 0; k < t.states; ++k) {
        const double lambda = spec.values[k];
        const double weight = dens.density(lambda);
        if (weight == 0.0) continue;
        const auto v = spec.vectors.col(k);
        double local = 0.0, shifted = 0.0;
        for (int j = 0; j < ny; ++j) {
            double row = 0.0;
            for (int i = 0; i < nx; ++i)
                row += 2.0 * std::imag(std::conj(v[index2d(g, i, j, 0)]) * v[index2d(g, i, j, 1)]);
            local += dp[j] * row;
            shifted += dp[(j + ny / 2) % ny] * row;
        }
        t.sigma += weight * local;
        t.sigma_shifted += weight * shifted;
        // i[H, P] v = i (H P v - lambda P v)
        Eigen::VectorXcd pv(v.size());
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                for (int s = 0; s < 2; ++s) pv[index2d(g, i, j, s)] = pgrid[j] * v[index2d(g, i, j, s)];
        const Eigen::VectorXcd cv = I * (H * pv - lambda * pv);
        cplx lit = 0.0;
        for (int j = 0; j < ny; ++j)
            if (chi[j] != 0.0)
                for (int i = 0; i < nx; ++i)
                    for (int s = 0; s < 2; ++s) lit += std::conj(v[index2d(g, i, j, s)]) * cv[index2d(g, i, j, s)];
        t.sigma_literal += weight * lit.real();
    }
    if (detail) *detail = t;
    return t.sigma;
}

/// sigma_I from a dense windowed eigendecomposition of H.
inline double trace_conductivity(const Eigen::MatrixXcd& H, const Grid2D& g, const SwitchProfile& P,
                                 const DensityProfile& dens, TraceDetail* detail = nullptr) {
    check_seam(g, P);
    return trace_conductivity(window_spectrum(H, dens), H, g, P, dens, detail);
}

struct StabilityRow {
    double coupling = 0.0;
    double two_pi_sigma = 0.0;
    double seam_residual = 0.0;
    double literal_difference = 0.0;
};

struct StabilityTable {
    double unperturbed = 0.0;  // 2 pi sigma without W
    long reference = 0;        // its rounded value
    std::vector<StabilityRow> rows;
    bool stable = false;
    std::optional<double> breakdown;  // first coupling that no longer rounds to the reference
};

inline StabilityTable stability_experiment(const ProfileSet& base, const PerturbationSpec& w,
                                           const std::vector<double>& couplings, const Grid2D& g,
                                           const SwitchProfile& P, const DensityProfile& dens, int workers = 1) {
    const double two_pi = 2.0 * std::numbers::pi;
    check_seam(g, P);
    w.validate();
    auto row_for = [&](const Eigen::MatrixXcd& H, double c) {
        TraceDetail d;
        trace_conductivity(H, g, P, dens, &d);
        return StabilityRow{c, two_pi * d.sigma, d.seam_residual(), d.literal_difference()};
    };
    StabilityTable out;
    const StabilityRow base_row = row_for(assemble_2d(g, base, std::nullopt, 0.0), 0.0);
    out.unperturbed = base_row.two_pi_sigma;
    out.reference = std::lround(out.unperturbed);
    // coupling 0 assembles to the same matrix bit for bit, so its solve is shared.
    out.rows = parallel_map<StabilityRow>(couplings.size(), workers, [&](std::size_t k) {
        if (couplings[k] == 0.0) return StabilityRow{0.0, base_row.two_pi_sigma, base_row.seam_residual,
                                                     base_row.literal_difference};
        return row_for(assemble_2d(g, base, w, couplings[k]), couplings[k]);
    });
    out.stable = true;
    for (const auto& r : out.rows) {
        if (std::lround(r.two_pi_sigma) != out.reference) {
            out.stable = false;
            if (!out.breakdown) out.breakdown = r.coupling;
        }
    }
    return out;
}

}  // namespace magflow
