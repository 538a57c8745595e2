#pragma once
//
// zeta sweeps: eigenvalue branches tracked by eigenvector overlap, with
// bisection of steps that cannot be matched unambiguously.
//

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magflow/assignment.hpp"
#include "magflow/bulk.hpp"
#include "magflow/error.hpp"
#include "magflow/fiber.hpp"
#include "magflow/parallel.hpp"

namespace magflow {

struct SweepConfig {
    double zeta_min = -8.0;
    double zeta_max = 8.0;
    int samples = 161;
    EnergyWindow window{-4.0, 4.0};
    double refine_tol = 0.2;
    double overlap_threshold = 0.8;
    double min_step = 1e-4;
    double candidate_cutoff = 0.5;  // overlaps below this are never paired
    double cluster_tol = 1e-8;      // eigenvalues closer than this are treated as one subspace
    int chunk = 16;                 // zeta samples solved (and held in memory) at once
    int workers = 1;

    double step() const { return (zeta_max - zeta_min) / (samples - 1); }
    double zeta(int k) const { return k == samples - 1 ? zeta_max : zeta_min + step() * k; }

    void validate() const {
        if (!(zeta_min < zeta_max)) throw ConfigError("sweep: requires zeta_min < zeta_max");
        if (samples < 2) throw ConfigError("sweep: requires samples >= 2");
        if (!(window.lo < window.hi)) throw ConfigError("sweep: requires window lo < hi");
        if (!(refine_tol > 0.0)) throw ConfigError("sweep: refine_tol must be positive");
        if (!(overlap_threshold > 0.0 && overlap_threshold <= 1.0)) throw ConfigError("sweep: overlap_threshold in (0,1]");
        if (!(candidate_cutoff > 0.0 && candidate_cutoff <= overlap_threshold))
            throw ConfigError("sweep: candidate_cutoff in (0, overlap_threshold]");
        if (!(min_step > 0.0)) throw ConfigError("sweep: min_step must be positive");
        if (chunk < 1 || workers < 1) throw ConfigError("sweep: chunk and workers must be >= 1");
    }
};

enum class AsymptoteKind { bulk_level, diverging };
enum class Side { minus, plus };

inline std::string_view to_string(AsymptoteKind k) { return k == AsymptoteKind::bulk_level ? "bulk_level" : "diverging"; }
inline std::string_view to_string(Side s) { return s == Side::plus ? "plus" : "minus"; }

/// For bulk_level, side is the half space whose spectrum contains value.
/// For diverging, side is the direction of |mu| growth: plus for mu -> +inf.
struct AsymptoteLabel {
    AsymptoteKind kind = AsymptoteKind::bulk_level;
    double value = 0.0;
    Side side = Side::plus;
};

/// How a branch starts or stops.
enum class BranchEnd { sweep_end, window_exit, filtered };

inline std::string_view to_string(BranchEnd e) {
    switch (e) {
        case BranchEnd::sweep_end: return "sweep_end";
        case BranchEnd::window_exit: return "window_exit";
        default: return "filtered";
    }
}

struct Branch {
    int id = 0;
    std::vector<double> zetas;
    std::vector<double> mus;
    std::vector<double> overlaps;  // with the previous sample; 1 at the first
    std::vector<double> boundary_masses;
    std::vector<double> velocities;  // d mu / d zeta
    double min_overlap = 1.0;
    BranchEnd start = BranchEnd::sweep_end;
    BranchEnd end = BranchEnd::sweep_end;
    EnergyWindow window;
    std::optional<AsymptoteLabel> asymptote_lo;
    std::optional<AsymptoteLabel> asymptote_hi;

    std::size_t size() const { return zetas.size(); }
    bool clipped() const { return start == BranchEnd::window_exit || end == BranchEnd::window_exit; }
};

struct SweepStats {
    long solves = 0;
    long bisections = 0;
    long cluster_rotations = 0;
    double smallest_step = 0.0;
    double max_residual = 0.0;
};

namespace detail {

struct Slice {
    double zeta = 0.0;
    std::vector<double> mu, velocity, bmass;
    std::vector<char> kept;
    Eigen::MatrixXcd psi;  // one column per state

    int size() const { return static_cast<int>(mu.size()); }
};

inline Slice solve_slice(const Grid1D& g, const ProfileSet& ps, double zeta, EnergyWindow w, const SpuriousFilter& f,
                         double* max_residual = nullptr) {
    auto pairs = eig_window(assemble_fiber(g, ps, zeta), w);
    Slice s;
    s.zeta = zeta;
    const int k = static_cast<int>(pairs.size());
    s.mu.resize(k);
    s.velocity.resize(k);
    s.bmass.resize(k);
    s.kept.resize(k);
    s.psi.resize(g.dim(), k);
    for (int j = 0; j < k; ++j) {
        s.mu[j] = pairs[j].mu;
        s.velocity[j] = pairs[j].velocity;
        s.bmass[j] = boundary_mass(pairs[j].psi, g, f.margin);
        s.kept[j] = s.bmass[j] <= f.threshold;
        s.psi.col(j) = pairs[j].psi;
        if (max_residual) *max_residual = std::max(*max_residual, pairs[j].residual);
    }
    return s;
}

struct Matching {
    bool ok = true;
    std::vector<int> match;    // state of the left slice -> state of the right slice
    std::vector<double> overlap;
    std::string reason;
};

class Tracker {
public:
    Tracker(const Grid1D& g, const ProfileSet& ps, const SweepConfig& cfg, const SpuriousFilter& f, SweepStats& st)
        : g_(g), ps_(ps), cfg_(cfg), f_(f), st_(st) {}

    void start(Slice s) {
        cur_ = std::move(s);
        owner_.assign(cur_.size(), -1);
        for (int j = 0; j < cur_.size(); ++j)
            if (cur_.kept[j]) owner_[j] = open_branch(j, 1.0, BranchEnd::sweep_end);
    }

    void step_to(Slice next) {
        align(next);
        Matching m = match(cur_, next);
        if (!m.ok) {
            const double dz = next.zeta - cur_.zeta;
            if (dz >= cfg_.min_step) {
                ++st_.bisections;
                const double mid = cur_.zeta + 0.5 * dz;
                ++st_.solves;
                step_to(solve_slice(g_, ps_, mid, cfg_.window, f_, &st_.max_residual));
                step_to(std::move(next));
                return;
            }
            throw TrackingError("tracking ambiguity (" + m.reason + ")", cur_.zeta);
        }
        const double dz = next.zeta - cur_.zeta;
        if (st_.smallest_step == 0.0 || dz < st_.smallest_step) st_.smallest_step = dz;
        commit(std::move(next), m);
    }

    std::vector<Branch> finish() {
        for (auto& b : branches_) b.window = cfg_.window;
        return std::move(branches_);
    }

private:
    int open_branch(int j, double overlap, BranchEnd why) {
        Branch b;
        b.id = static_cast<int>(branches_.size());
        b.start = why;
        branches_.push_back(std::move(b));
        append(static_cast<int>(branches_.size()) - 1, cur_, j, overlap);
        return branches_.back().id;
    }

    void append(int id, const Slice& s, int j, double overlap) {
        Branch& b = branches_[id];
        b.zetas.push_back(s.zeta);
        b.mus.push_back(s.mu[j]);
        b.overlaps.push_back(overlap);
        b.boundary_masses.push_back(s.bmass[j]);
        b.velocities.push_back(s.velocity[j]);
        b.min_overlap = std::min(b.min_overlap, overlap);
    }

    // Near-degenerate states of `next` span a subspace with no preferred basis;
    // rotate them to best match the current states.
    void align(Slice& next) {
        const int k = next.size();
        int i = 0;
        while (i < k) {
            int j = i + 1;
            while (j < k && next.mu[j] - next.mu[j - 1] < cfg_.cluster_tol) ++j;
            const int c = j - i;
            if (c >= 2 && cur_.size() >= c) {
                ++st_.cluster_rotations;
                const Eigen::MatrixXcd M = cur_.psi.adjoint() * next.psi.middleCols(i, c);
                std::vector<int> rows(cur_.size());
                for (int r = 0; r < cur_.size(); ++r) rows[r] = r;
                std::stable_sort(rows.begin(), rows.end(),
                                 [&](int a, int b) { return M.row(a).norm() > M.row(b).norm(); });
                Eigen::MatrixXcd Msel(c, c);
                for (int r = 0; r < c; ++r) Msel.row(r) = M.row(rows[r]);
                Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Msel, Eigen::ComputeFullU | Eigen::ComputeFullV);
                const Eigen::MatrixXcd R = svd.matrixV() * svd.matrixU().adjoint();
                const Eigen::MatrixXcd rotated = next.psi.middleCols(i, c) * R;
                next.psi.middleCols(i, c) = rotated;
                for (int q = i; q < j; ++q) {
                    next.velocity[q] = sigma2_expectation(next.psi.col(q));
                    next.bmass[q] = boundary_mass(next.psi.col(q), g_, f_.margin);
                    next.kept[q] = next.bmass[q] <= f_.threshold;
                }
            }
            i = j;
        }
    }

    bool near_edge(double mu, double dz) const {
        const double reach = std::abs(dz) + 1e-9 * (1.0 + std::abs(mu));
        return mu - cfg_.window.lo <= reach || cfg_.window.hi - mu <= reach;
    }

    Matching match(const Slice& a, const Slice& b) const {
        Matching m;
        const double dz = b.zeta - a.zeta;
        const Eigen::MatrixXd O = (a.psi.adjoint() * b.psi).cwiseAbs();
        if (!O.allFinite()) throw SolverError("non-finite overlap between slices at zeta=" + std::to_string(b.zeta));
        Eigen::MatrixXd w = O;
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                if (w(i, j) < cfg_.candidate_cutoff) w(i, j) = 0.0;
        m.match = max_weight_assignment(w);
        m.overlap.assign(a.size(), 0.0);
        std::vector<char> hit(b.size(), 0);
        std::ostringstream why;
        for (int i = 0; i < a.size(); ++i) {
            const int j = m.match[i];
            if (j < 0) {
                if (a.kept[i] && !near_edge(a.mu[i], dz)) {
                    m.ok = false;
                    why << "state at mu=" << a.mu[i] << " lost; ";
                }
                continue;
            }
            hit[j] = 1;
            m.overlap[i] = O(i, j);
            if (!a.kept[i] && !b.kept[j]) continue;
            const double dmu = std::abs(b.mu[j] - a.mu[i]);
            if (O(i, j) < cfg_.overlap_threshold || dmu > cfg_.refine_tol || dmu > std::abs(dz) + 1e-8) {
                m.ok = false;
                why << "overlap " << O(i, j) << " at mu=" << a.mu[i] << "; ";
            }
        }
        for (int j = 0; j < b.size(); ++j) {
            if (!hit[j] && b.kept[j] && !near_edge(b.mu[j], dz)) {
                m.ok = false;
                why << "state at mu=" << b.mu[j] << " appeared; ";
            }
        }
        m.reason = why.str();
        return m;
    }

    void commit(Slice next, const Matching& m) {
        std::vector<int> owner(next.size(), -1);
        std::vector<char> from_filtered(next.size(), 0);
        for (int i = 0; i < cur_.size(); ++i) {
            const int j = m.match[i];
            const int id = owner_[i];
            if (j >= 0 && !cur_.kept[i]) from_filtered[j] = 1;
            if (id < 0) continue;
            if (j >= 0 && next.kept[j]) {
                append(id, next, j, m.overlap[i]);
                owner[j] = id;
            } else {
                branches_[id].end = j >= 0 ? BranchEnd::filtered : BranchEnd::window_exit;
            }
        }
        cur_ = std::move(next);
        for (int j = 0; j < cur_.size(); ++j) {
            if (cur_.kept[j] && owner[j] < 0)
                owner[j] = open_branch(j, 1.0, from_filtered[j] ? BranchEnd::filtered : BranchEnd::window_exit);
        }
        owner_ = std::move(owner);
    }

    const Grid1D& g_;
    const ProfileSet& ps_;
    const SweepConfig& cfg_;
    const SpuriousFilter& f_;
    SweepStats& st_;
    Slice cur_;
    std::vector<int> owner_;  // branch id per state of cur_, -1 if none
    std::vector<Branch> branches_;
};

}  // namespace detail

/// Tracks all retained eigenpairs in cfg.window over [zeta_min, zeta_max].
inline std::vector<Branch> sweep_branches(const Grid1D& grid, const ProfileSet& ps, const SweepConfig& cfg,
                                          const SpuriousFilter& f, SweepStats* stats = nullptr) {
    grid.validate();
    ps.validate();
    cfg.validate();
    f.validate(grid);
    SweepStats local;
    SweepStats& st = stats ? *stats : local;
    st = SweepStats{};
    detail::Tracker tr(grid, ps, cfg, f, st);
    std::vector<double> res(cfg.samples, 0.0);
    for (int k0 = 0; k0 < cfg.samples; k0 += cfg.chunk) {
        const int n = std::min(cfg.chunk, cfg.samples - k0);
        auto slices = parallel_map<detail::Slice>(n, cfg.workers, [&](std::size_t i) {
            return detail::solve_slice(grid, ps, cfg.zeta(k0 + static_cast<int>(i)), cfg.window, f, &res[k0 + i]);
        });
        st.solves += n;
        for (int i = 0; i < n; ++i) {
            if (k0 + i == 0) {
                tr.start(std::move(slices[i]));
            } else {
                tr.step_to(std::move(slices[i]));
            }
        }
    }
    for (double r : res) st.max_residual = std::max(st.max_residual, r);
    return tr.finish();
}

namespace detail {

// Half spaces whose guiding centers x = zeta / B recede to infinity inside them as zeta -> dir * inf.
inline std::vector<Side> sides_reached(const HalfSpaceParams& minus, const HalfSpaceParams& plus, int dir) {
    std::vector<Side> out;
    if (dir * plus.B > 0) out.push_back(Side::plus);
    if (dir * minus.B < 0) out.push_back(Side::minus);
    return out;
}

inline std::optional<AsymptoteLabel> match_level(double mu, const HalfSpaceParams& minus, const HalfSpaceParams& plus,
                                                 int dir, double tol) {
    std::optional<AsymptoteLabel> best;
    double dist = tol;
    for (Side s : sides_reached(minus, plus, dir)) {
        const auto& hp = s == Side::plus ? plus : minus;
        for (double level : levels_in(hp, mu - tol, mu + tol)) {
            if (std::abs(level - mu) <= dist) {
                dist = std::abs(level - mu);
                best = AsymptoteLabel{AsymptoteKind::bulk_level, level, s};
            }
        }
    }
    return best;
}

// Endpoint within 10% of the window width from an edge, approached monotonically
// over the last five samples towards the sweep end.
inline std::optional<AsymptoteLabel> divergence(const Branch& b, int dir) {
    const std::size_t n = b.size();
    const double width = b.window.hi - b.window.lo;
    const double mu = dir > 0 ? b.mus.back() : b.mus.front();
    const bool near_hi = b.window.hi - mu <= 0.1 * width;
    const bool near_lo = mu - b.window.lo <= 0.1 * width;
    if (!near_hi && !near_lo) return std::nullopt;
    if (n < 2) return std::nullopt;
    // A branch that left the window mid-sweep only needs its last step to head for the edge.
    const std::size_t m = std::min<std::size_t>((dir > 0 ? b.end : b.start) == BranchEnd::window_exit ? 2 : 5, n);
    int sign = 0;
    for (std::size_t q = 0; q + 1 < m; ++q) {
        // Walk outwards towards the sweep end.
        const double a = dir > 0 ? b.mus[n - m + q] : b.mus[m - 1 - q];
        const double c = dir > 0 ? b.mus[n - m + q + 1] : b.mus[m - 2 - q];
        const int s = sgn(c - a);
        if (s == 0 || (sign != 0 && s != sign)) return std::nullopt;
        sign = s;
    }
    if ((sign > 0 && !near_hi) || (sign < 0 && !near_lo)) return std::nullopt;
    return AsymptoteLabel{AsymptoteKind::diverging, mu, sign > 0 ? Side::plus : Side::minus};
}

}  // namespace detail

/// Labels both ends of a branch: convergence to a bulk level, or exit through the energy window.
inline Branch classify_asymptotics(Branch branch, const HalfSpaceParams& minus, const HalfSpaceParams& plus,
                                   double match_tol) {
    if (branch.size() == 0) throw ClassificationError("unclassifiable endpoint: empty branch");
    for (int dir : {-1, 1}) {
        const BranchEnd how = dir > 0 ? branch.end : branch.start;
        const double mu = dir > 0 ? branch.mus.back() : branch.mus.front();
        std::optional<AsymptoteLabel> label;
        if (how == BranchEnd::sweep_end) label = detail::match_level(mu, minus, plus, dir, match_tol);
        if (!label && how != BranchEnd::filtered) label = detail::divergence(branch, dir);
        if (!label) {
            std::ostringstream os;
            os << "unclassifiable endpoint: branch " << branch.id << " at zeta="
               << (dir > 0 ? branch.zetas.back() : branch.zetas.front()) << " mu=" << mu << " ("
               << to_string(how) << ")";
            throw ClassificationError(os.str());
        }
        (dir > 0 ? branch.asymptote_hi : branch.asymptote_lo) = label;
    }
    return branch;
}

/// True iff no branch endpoint lies within margin of alpha.
inline bool validate_window(const std::vector<Branch>& branches, double alpha, double margin) {
    for (const auto& b : branches) {
        if (b.size() == 0) continue;
        if (std::abs(b.mus.front() - alpha) < margin || std::abs(b.mus.back() - alpha) < margin) return false;
    }
    return true;
}

}  // namespace magflow
