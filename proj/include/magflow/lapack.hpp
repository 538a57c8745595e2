#pragma once
//
// Thin LAPACKE wrappers for windowed symmetric/Hermitian eigensolves.
//

#include <algorithm>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <Eigen/Dense>

#include "magflow/error.hpp"

namespace magflow::lapack {

struct RealWindowResult {
    std::vector<double> values;
    Eigen::MatrixXd vectors;  // n x k, column j belongs to values[j]
};

struct ComplexWindowResult {
    std::vector<double> values;
    Eigen::MatrixXcd vectors;
};

/// Eigenpairs of a real symmetric tridiagonal matrix with eigenvalues in (lo, hi].
inline RealWindowResult tridiagonal_window(std::vector<double> diag, std::vector<double> off, double lo, double hi,
                                           bool want_vectors = true) {
    const lapack_int n = static_cast<lapack_int>(diag.size());
    RealWindowResult out;
    if (n == 0) return out;
    off.resize(static_cast<size_t>(n));  // dstevr uses e[n-1] as workspace
    // Bisection count first so the eigenvector buffer is sized to the window.
    lapack_int count = 0;
    {
        std::vector<double> wc(static_cast<size_t>(n));
        std::vector<lapack_int> iblock(static_cast<size_t>(n)), isplit(static_cast<size_t>(n));
        lapack_int nsplit = 0;
        const lapack_int info = LAPACKE_dstebz('V', 'E', n, lo, hi, 0, 0, 0.0, diag.data(), off.data(), &count,
                                               &nsplit, wc.data(), iblock.data(), isplit.data());
        if (info != 0) throw SolverError("dstebz failed (info=" + std::to_string(info) + ")");
    }
    if (count == 0) return out;
    const lapack_int cols = std::min<lapack_int>(n, count + 16);
    std::vector<double> w(static_cast<size_t>(n));
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(cols));
    Eigen::MatrixXd z(want_vectors ? n : 1, want_vectors ? cols : 1);
    lapack_int found = 0;
    const std::vector<double> diag0(diag), off0(off);  // dstevr overwrites both
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'V', n, diag.data(),
                                           off.data(), lo, hi, 0, 0, 0.0, &found, w.data(), z.data(),
                                           want_vectors ? n : 1, isuppz.data());
    if (info != 0) throw SolverError("dstevr failed to converge (info=" + std::to_string(info) + ")");
    if (found > cols) throw SolverError("dstevr returned more eigenpairs than the bisection count");
    out.values.assign(w.begin(), w.begin() + found);
    if (want_vectors) out.vectors = z.leftCols(found);
    if (want_vectors && !out.vectors.allFinite()) {
        // MRRR occasionally hands back NaN vectors for nearly decoupled blocks;
        // bisection plus inverse iteration is slower but does not.
        std::vector<double> d2(diag0), e2(off0);
        std::vector<lapack_int> ifail(static_cast<size_t>(n));
        z.resize(n, cols);
        found = 0;
        const double abstol = 2.0 * LAPACKE_dlamch('S');
        const lapack_int info2 = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'V', n, d2.data(), e2.data(), lo, hi, 0, 0,
                                                abstol, &found, w.data(), z.data(), n, ifail.data());
        if (info2 != 0) throw SolverError("dstevx failed to converge (info=" + std::to_string(info2) + ")");
        if (found > cols) throw SolverError("dstevx returned more eigenpairs than the bisection count");
        out.values.assign(w.begin(), w.begin() + found);
        out.vectors = z.leftCols(found);
        if (!out.vectors.allFinite()) throw SolverError("non-finite eigenvectors from the tridiagonal solver");
    }
    return out;
}

/// Eigenpairs of a dense Hermitian matrix with eigenvalues in (lo, hi]. The matrix is overwritten.
inline ComplexWindowResult hermitian_window(Eigen::MatrixXcd& a, double lo, double hi, bool want_vectors = true) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    ComplexWindowResult out;
    if (n == 0) return out;
    std::vector<double> w(static_cast<size_t>(n));
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
    lapack_int found = 0;
    Eigen::MatrixXcd z;
    lapack_int ldz = 1;
    if (want_vectors) {
        z.resize(n, n);
        ldz = n;
    }
    const lapack_int info =
        LAPACKE_zheevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'V', 'L', n, a.data(), n, lo, hi, 0, 0, 0.0,
                       &found, w.data(), want_vectors ? z.data() : nullptr, ldz, isuppz.data());
    if (info != 0) throw SolverError("zheevr failed to converge (info=" + std::to_string(info) + ")");
    out.values.assign(w.begin(), w.begin() + found);
    if (want_vectors) out.vectors = z.leftCols(found);
    if (want_vectors && !out.vectors.allFinite()) throw SolverError("zheevr returned non-finite eigenvectors");
    return out;
}

}  // namespace magflow::lapack
