#pragma once
//
// Finite-difference discretization of the fiber operator
//
//   H(zeta) = D_x s1 + (zeta - A2(x)) s2 + m(x) s3 + V(x) s0
//
// on a uniform grid. The off-diagonal block D_x - i(zeta - A2) uses a forward
// difference, its adjoint the matching backward difference, so the matrix is
// Hermitian by construction. In the ordering (psi2(x0), psi1(x0), psi2(x1),
// psi1(x1), ...) the dirichlet matrix is tridiagonal.
//
// Vectors are stored interleaved: psi[2i] = psi1(x_i), psi[2i+1] = psi2(x_i).
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "magflow/error.hpp"
#include "magflow/lapack.hpp"
#include "magflow/profiles.hpp"

namespace magflow {

using cplx = std::complex<double>;

enum class BoundaryCondition { dirichlet, periodic };

inline std::string_view to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::dirichlet ? "dirichlet" : "periodic";
}

inline BoundaryCondition parse_bc(std::string_view s) {
    if (s == "dirichlet") return BoundaryCondition::dirichlet;
    if (s == "periodic") return BoundaryCondition::periodic;
    throw ConfigError("unknown boundary condition '" + std::string(s) + "'");
}

/// Resolution diagnostics of a grid for a given field profile and zeta range.
struct GridDiagnostics {
    double h = 0.0;
    double momentum_product = 0.0;  // h * max|B| * L, should stay below pi
    bool momentum_resolved = false;
    // The forward stencil has a second zero of its symbol where zeta - A2(x) = 2/h.
    // clearance = 2/h - (zeta_max - min_x A2(x)); positive means no such copy on the grid.
    double doubler_clearance = 0.0;
    bool doubler_free = false;
};

struct Grid1D {
    double L = 20.0;
    int N = 800;
    BoundaryCondition bc = BoundaryCondition::dirichlet;

    double h() const { return bc == BoundaryCondition::dirichlet ? 2.0 * L / (N - 1) : 2.0 * L / N; }
    double x(int i) const { return -L + h() * i; }
    int dim() const { return 2 * N; }

    /// Minimal requirements for assembling a matrix.
    void check_structure() const {
        if (!(L > 0.0) || N < 2) throw ConfigError("grid: requires L > 0 and N >= 2");
    }

    /// Requirements for production sweeps.
    void validate() const {
        check_structure();
        if (N < 16) throw ConfigError("grid: N must be >= 16");
    }

    GridDiagnostics diagnostics(const ProfileSet& ps, double zeta_max) const {
        GridDiagnostics d;
        d.h = h();
        d.momentum_product = d.h * ps.B.sup_abs() * L;
        d.momentum_resolved = d.momentum_product < std::numbers::pi;
        double min_a = std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i) min_a = std::min(min_a, magnetic_potential(ps, x(i)));
        d.doubler_clearance = 2.0 / d.h - (zeta_max - min_a);
        d.doubler_free = d.doubler_clearance > 0.0;
        return d;
    }
};

/// Discretized fiber Hamiltonian at one zeta.
struct FiberMatrix {
    double zeta = 0.0;
    int N = 0;
    BoundaryCondition bc = BoundaryCondition::dirichlet;
    std::vector<double> diag;    // 2N entries: V+m, V-m per site
    std::vector<cplx> t_on;      // (psi1(x_i), psi2(x_i)) coupling
    std::vector<cplx> t_next;    // (psi1(x_i), psi2(x_{i+1})) coupling; N entries when periodic

    int dim() const { return 2 * N; }
    bool tridiagonal() const { return bc == BoundaryCondition::dirichlet; }

    Eigen::MatrixXcd dense() const {
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim(), dim());
        for (int i = 0; i < dim(); ++i) H(i, i) = diag[i];
        for (int i = 0; i < N; ++i) {
            H(2 * i, 2 * i + 1) += t_on[i];
            H(2 * i + 1, 2 * i) += std::conj(t_on[i]);
        }
        for (int i = 0; i < static_cast<int>(t_next.size()); ++i) {
            const int j = (i + 1) % N;
            H(2 * i, 2 * j + 1) += t_next[i];
            H(2 * j + 1, 2 * i) += std::conj(t_next[i]);
        }
        return H;
    }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
        Eigen::VectorXcd out(dim());
        for (int i = 0; i < dim(); ++i) out[i] = diag[i] * v[i];
        for (int i = 0; i < N; ++i) {
            out[2 * i] += t_on[i] * v[2 * i + 1];
            out[2 * i + 1] += std::conj(t_on[i]) * v[2 * i];
        }
        for (int i = 0; i < static_cast<int>(t_next.size()); ++i) {
            const int j = (i + 1) % N;
            out[2 * i] += t_next[i] * v[2 * j + 1];
            out[2 * j + 1] += std::conj(t_next[i]) * v[2 * i];
        }
        return out;
    }

    /// Diagonal matrix with the given entries; used for solver checks.
    static FiberMatrix diagonal(std::vector<double> entries) {
        if (entries.size() % 2 != 0 || entries.empty()) throw ConfigError("diagonal fiber needs an even, nonzero size");
        FiberMatrix f;
        f.N = static_cast<int>(entries.size() / 2);
        f.diag = std::move(entries);
        f.t_on.assign(f.N, cplx{});
        f.t_next.assign(f.N - 1, cplx{});
        return f;
    }
};

inline FiberMatrix assemble_fiber(const Grid1D& grid, const ProfileSet& ps, double zeta) {
    grid.check_structure();
    const int n = grid.N;
    const double h = grid.h();
    FiberMatrix f;
    f.zeta = zeta;
    f.N = n;
    f.bc = grid.bc;
    f.diag.resize(2 * n);
    f.t_on.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.x(i);
        const double m = ps.m.evaluate(x);
        const double v = ps.V.evaluate(x);
        const double a = magnetic_potential(ps, x);
        f.diag[2 * i] = v + m;
        f.diag[2 * i + 1] = v - m;
        // -i (psi(x+h) - psi(x))/h - i (zeta - A) psi(x): the on-site part is i (1/h - zeta + A).
        f.t_on[i] = cplx(0.0, 1.0 / h - zeta + a);
    }
    f.t_next.assign(grid.bc == BoundaryCondition::periodic ? n : n - 1, cplx(0.0, -1.0 / h));
    return f;
}

struct EigenPair {
    double mu = 0.0;
    Eigen::VectorXcd psi;
    double residual = 0.0;
    double velocity = 0.0;  // <psi, s2 psi> = d mu / d zeta
    double boundary_mass = std::numeric_limits<double>::quiet_NaN();
};

/// d mu/d zeta of a normalized eigenvector (the fiber depends on zeta only through zeta s2).
inline double sigma2_expectation(const Eigen::VectorXcd& psi) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < psi.size(); i += 2) acc += std::imag(std::conj(psi[i]) * psi[i + 1]);
    return 2.0 * acc;
}

struct EnergyWindow {
    double lo = -4.0;
    double hi = 4.0;
};

namespace detail {

inline void finish_pair(const FiberMatrix& A, EigenPair& p) {
    const double nrm = p.psi.norm();
    if (nrm > 0.0) p.psi /= nrm;
    p.residual = (A.apply(p.psi) - p.mu * p.psi).norm();
    p.velocity = sigma2_expectation(p.psi);
    if (p.residual > 1e-8 * (1.0 + std::abs(p.mu))) {
        std::ostringstream os;
        os << "eigenpair residual " << p.residual << " exceeds tolerance at mu=" << p.mu << " zeta=" << A.zeta;
        throw SolverError(os.str());
    }
}

}  // namespace detail

/// All eigenpairs with mu in [lo, hi], sorted by mu.
inline std::vector<EigenPair> eig_window(const FiberMatrix& A, EnergyWindow w) {
    if (!(w.lo < w.hi)) throw ConfigError("eig_window: requires lo < hi");
    const double lo = std::nextafter(w.lo, -std::numeric_limits<double>::infinity());
    std::vector<EigenPair> out;
    const int n = A.dim();
    if (A.tridiagonal()) {
        // Staggered order: position 2i holds psi2(x_i), 2i+1 holds psi1(x_i).
        std::vector<double> d(n), e(n - 1);
        std::vector<cplx> ec(n - 1);
        for (int i = 0; i < A.N; ++i) {
            d[2 * i] = A.diag[2 * i + 1];
            d[2 * i + 1] = A.diag[2 * i];
            ec[2 * i] = std::conj(A.t_on[i]);
            if (i + 1 < A.N) ec[2 * i + 1] = A.t_next[i];
        }
        // Diagonal phase gauge making the off-diagonal real and nonnegative.
        std::vector<cplx> phase(n, cplx(1.0, 0.0));
        for (int k = 0; k + 1 < n; ++k) {
            const double r = std::abs(ec[k]);
            e[k] = r;
            phase[k + 1] = r > 0.0 ? phase[k] * std::conj(ec[k]) / r : phase[k];
        }
        auto res = lapack::tridiagonal_window(std::move(d), std::move(e), lo, w.hi);
        out.resize(res.values.size());
        for (size_t j = 0; j < res.values.size(); ++j) {
            EigenPair& p = out[j];
            p.mu = res.values[j];
            p.psi.resize(n);
            for (int i = 0; i < A.N; ++i) {
                p.psi[2 * i] = phase[2 * i + 1] * res.vectors(2 * i + 1, j);
                p.psi[2 * i + 1] = phase[2 * i] * res.vectors(2 * i, j);
            }
        }
    } else {
        Eigen::MatrixXcd H = A.dense();
        auto res = lapack::hermitian_window(H, lo, w.hi);
        out.resize(res.values.size());
        for (size_t j = 0; j < res.values.size(); ++j) {
            out[j].mu = res.values[j];
            out[j].psi = res.vectors.col(static_cast<Eigen::Index>(j));
        }
    }
    for (auto& p : out) detail::finish_pair(A, p);
    std::stable_sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) { return a.mu < b.mu; });
    return out;
}

/// Boundary-strip rule for discarding modes that live on the computational edge.
struct SpuriousFilter {
    double margin = 2.5;
    double threshold = 0.3;

    static SpuriousFilter defaults(const Grid1D& g) { return {g.L / 8.0, 0.3}; }

    void validate(const Grid1D& g) const {
        if (!(margin > 0.0 && margin < g.L / 2.0)) throw ConfigError("filter: requires 0 < margin < L/2");
        if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("filter: requires 0 < threshold < 1");
    }
};

/// Probability mass of psi on sites with |x| > L - margin.
inline double boundary_mass(const Eigen::VectorXcd& psi, const Grid1D& g, double margin) {
    const double cut = g.L - margin;
    double mass = 0.0;
    for (int i = 0; i < g.N; ++i) {
        if (std::abs(g.x(i)) > cut) mass += std::norm(psi[2 * i]) + std::norm(psi[2 * i + 1]);
    }
    return mass;
}

/// Keeps pairs whose boundary mass does not exceed the threshold; stamps boundary_mass on every pair.
inline std::vector<EigenPair> filter_spurious(std::vector<EigenPair> pairs, const Grid1D& g, const SpuriousFilter& f) {
    f.validate(g);
    std::vector<EigenPair> kept;
    kept.reserve(pairs.size());
    for (auto& p : pairs) {
        p.boundary_mass = boundary_mass(p.psi, g, f.margin);
        if (p.boundary_mass <= f.threshold) kept.push_back(std::move(p));
    }
    return kept;
}

/// assemble + eig_window + filter_spurious.
inline std::vector<EigenPair> solve_fiber(const Grid1D& g, const ProfileSet& ps, double zeta, EnergyWindow w,
                                          const SpuriousFilter& f) {
    return filter_spurious(eig_window(assemble_fiber(g, ps, zeta), w), g, f);
}

}  // namespace magflow
