#pragma once
//
// Closed-form spectra of the constant-coefficient half-space Hamiltonians
// and the spectral-flow prediction built from them.
//

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "magflow/error.hpp"
#include "magflow/profiles.hpp"

namespace magflow {

/// Bulk triple (B, m, V) of one half space. B must be nonzero.
struct HalfSpaceParams {
    double B = 1.0;
    double m = 0.0;
    double V = 0.0;

    void validate() const {
        if (B == 0.0 || !std::isfinite(B)) throw ConfigError("half-space field B must be nonzero");
    }
};

inline HalfSpaceParams minus_side(const ProfileSet& ps) { return {ps.B.lower, ps.m.lower, ps.V.lower}; }
inline HalfSpaceParams plus_side(const ProfileSet& ps) { return {ps.B.upper, ps.m.upper, ps.V.upper}; }

/// Exact half-integer, stored as its double.
struct HalfInt {
    long twice = 0;

    constexpr double value() const { return 0.5 * static_cast<double>(twice); }
    constexpr bool is_half_odd() const { return twice % 2 != 0; }
    friend constexpr bool operator==(HalfInt, HalfInt) = default;
};

inline std::string to_string(HalfInt h) {
    if (h.twice % 2 == 0) return std::to_string(h.twice / 2);
    return std::to_string(h.twice) + "/2";
}

struct BulkSpectrum {
    std::vector<double> levels;  // sorted, includes the zeroth level
    double zeroth_level = 0.0;
    int k_max = 0;
};

struct FlowPrediction {
    HalfInt I_minus;
    HalfInt I_plus;
    long sf = 0;
    long N_minus = 0;
    long N_plus = 0;
};

inline int sgn(double x) { return (x > 0.0) - (x < 0.0); }

/// Tolerance used to decide that an energy sits on a bulk level.
inline constexpr double kLevelTol = 1e-9;

inline double landau_level(const HalfSpaceParams& hp, long k) {
    return std::sqrt(2.0 * static_cast<double>(k) * std::abs(hp.B) + hp.m * hp.m);
}

inline BulkSpectrum landau_levels(const HalfSpaceParams& hp, int k_max) {
    hp.validate();
    if (k_max < 1) throw ConfigError("landau_levels: k_max must be >= 1");
    BulkSpectrum out;
    out.k_max = k_max;
    out.zeroth_level = hp.m * sgn(hp.B) + hp.V;
    out.levels.reserve(2 * k_max + 1);
    for (int k = 1; k <= k_max; ++k) {
        const double e = landau_level(hp, k);
        out.levels.push_back(hp.V - e);
        out.levels.push_back(hp.V + e);
    }
    out.levels.push_back(out.zeroth_level);
    std::sort(out.levels.begin(), out.levels.end());
    return out;
}

/// All bulk levels inside [lo, hi], sorted.
inline std::vector<double> levels_in(const HalfSpaceParams& hp, double lo, double hi) {
    hp.validate();
    std::vector<double> out;
    const double z = hp.m * sgn(hp.B) + hp.V;
    if (z >= lo && z <= hi) out.push_back(z);
    const double reach = std::max(std::abs(lo - hp.V), std::abs(hi - hp.V));
    for (long k = 1;; ++k) {
        const double e = landau_level(hp, k);
        if (e > reach) break;
        if (hp.V - e >= lo && hp.V - e <= hi) out.push_back(hp.V - e);
        if (hp.V + e >= lo && hp.V + e <= hi) out.push_back(hp.V + e);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline bool in_bulk_spectrum(const HalfSpaceParams& hp, double alpha, double tol = kLevelTol) {
    const double scale = tol * (1.0 + std::abs(alpha));
    for (double level : levels_in(hp, alpha - 1.0, alpha + 1.0)) {
        if (std::abs(level - alpha) <= scale) return true;
    }
    return false;
}

namespace detail {

// Largest k >= 0 with sqrt(2k|B| + m^2) < |alpha - V|, or -1 if none.
// Throws when |alpha - V| equals one of the values for k >= k_from.
inline long levels_below(const HalfSpaceParams& hp, double alpha, long k_from) {
    const double d = std::abs(alpha - hp.V);
    const double q = (d * d - hp.m * hp.m) / (2.0 * std::abs(hp.B));
    long k = q < 0.0 ? -1 : static_cast<long>(std::floor(q));
    const double scale = kLevelTol * (1.0 + d);
    for (long j = std::max(0L, k - 1); j <= k + 1; ++j) {
        if (j >= k_from && std::abs(landau_level(hp, j) - d) <= scale) {
            std::ostringstream os;
            os << "alpha on bulk level: |alpha - V| = sqrt(2*" << j << "|B| + m^2) at alpha=" << alpha;
            throw BulkLevelError(os.str());
        }
    }
    while (k >= 0 && landau_level(hp, k) >= d) --k;
    while (landau_level(hp, k + 1) < d) ++k;
    return k;
}

}  // namespace detail

/// N(H;alpha): bulk levels of H - V strictly between |m| and |alpha - V|.
inline long count_levels(const HalfSpaceParams& hp, double alpha) {
    hp.validate();
    const long k = detail::levels_below(hp, alpha, 0);
    return std::max(0L, k);
}

/// I(H;alpha) = sgn(B) sgn(alpha - V - m sgn B) (N + 1/2).
inline HalfInt half_index(const HalfSpaceParams& hp, double alpha) {
    hp.validate();
    if (in_bulk_spectrum(hp, alpha)) {
        std::ostringstream os;
        os << "flow undefined at alpha=" << alpha << " (bulk level)";
        throw BulkLevelError(os.str());
    }
    // |alpha - V| = |m| is allowed here when it is not the zeroth level.
    const long n = std::max(0L, detail::levels_below(hp, alpha, 1));
    const int s = sgn(hp.B) * sgn(alpha - hp.V - hp.m * sgn(hp.B));
    return HalfInt{s * (2 * n + 1)};
}

inline FlowPrediction predicted_sf(const HalfSpaceParams& minus, const HalfSpaceParams& plus, double alpha) {
    minus.validate();
    plus.validate();
    if (in_bulk_spectrum(minus, alpha) || in_bulk_spectrum(plus, alpha)) {
        std::ostringstream os;
        os << "alpha in bulk spectrum: " << alpha;
        throw BulkLevelError(os.str());
    }
    FlowPrediction p;
    p.I_minus = half_index(minus, alpha);
    p.I_plus = half_index(plus, alpha);
    p.sf = (p.I_minus.twice - p.I_plus.twice) / 2;
    p.N_minus = std::max(0L, detail::levels_below(minus, alpha, 1));
    p.N_plus = std::max(0L, detail::levels_below(plus, alpha, 1));
    return p;
}

inline FlowPrediction predicted_sf(const ProfileSet& ps, double alpha) {
    return predicted_sf(minus_side(ps), plus_side(ps), alpha);
}

/// A connected component (lo, hi) of the common resolvent set of both half spaces.
struct GapComponent {
    double lo;
    double hi;
};

/// Gap components of rho(H+) and rho(H-) that intersect [lo, hi], clipped to it.
inline std::vector<GapComponent> gap_components(const HalfSpaceParams& minus, const HalfSpaceParams& plus,
                                                double lo, double hi) {
    std::vector<double> all = levels_in(minus, lo, hi);
    const auto p = levels_in(plus, lo, hi);
    all.insert(all.end(), p.begin(), p.end());
    std::sort(all.begin(), all.end());
    std::vector<GapComponent> out;
    double prev = lo;
    for (double e : all) {
        if (e > prev) out.push_back({prev, e});
        prev = std::max(prev, e);
    }
    if (hi > prev) out.push_back({prev, hi});
    return out;
}

}  // namespace magflow
