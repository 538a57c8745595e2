#pragma once
//
// End-to-end runs shared by the CLI and the acceptance driver.
//

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magflow/branches.hpp"
#include "magflow/bulk.hpp"
#include "magflow/config.hpp"
#include "magflow/flow.hpp"
#include "magflow/oracle2d.hpp"
#include "magflow/parallel.hpp"
#include "magflow/report.hpp"

namespace magflow {

#ifndef MAGFLOW_VERSION
#define MAGFLOW_VERSION "0.0.0"
#endif

inline constexpr const char* kVersion = MAGFLOW_VERSION;
inline constexpr double kAsymptoteTol = 5e-2;  // branch endpoint vs bulk level
inline constexpr double kSeamTol = 0.02;

/// Wall-clock seconds per stage. Kept out of the manifest so that stays byte-stable.
class Timings {
public:
    template <class Fn>
    auto time(const std::string& stage, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            Timings* self;
            std::string stage;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                self->seconds_[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        } rec{this, stage, t0};
        return fn();
    }
    nlohmann::json to_json() const { return nlohmann::json(seconds_); }

private:
    std::map<std::string, double> seconds_;
};

inline nlohmann::json tolerances_json(const RunConfig& c) {
    return {{"overlap_threshold", c.sweep.overlap_threshold},
            {"candidate_cutoff", c.sweep.candidate_cutoff},
            {"refine_tol", c.sweep.refine_tol},
            {"min_step", c.sweep.min_step},
            {"cluster_tol", c.sweep.cluster_tol},
            {"filter_margin", c.filter.margin},
            {"filter_threshold", c.filter.threshold},
            {"window_margin", c.window_margin},
            {"asymptote_tol", kAsymptoteTol},
            {"eig_residual_rel", 1e-8},
            {"crossing_tol", 1e-6},
            {"node_tol", kNodeTol},
            {"alpha_shift", kAlphaShift},
            {"conductivity_agreement", 1e-6},
            {"level_tol", kLevelTol},
            {"seam_tol", kSeamTol}};
}

// ---- bulk -------------------------------------------------------------------

inline std::vector<BulkRow> run_bulk(const RunConfig& c) {
    std::vector<BulkRow> rows;
    for (double a : c.alphas) rows.push_back({a, predicted_sf(c.profiles, a)});
    return rows;
}

// ---- branches ---------------------------------------------------------------

struct BranchesResult {
    std::vector<Branch> branches;
    SweepStats stats;
};

inline BranchesResult run_branches(const RunConfig& c) {
    BranchesResult r;
    auto raw = sweep_branches(c.grid, c.profiles, c.sweep, c.filter, &r.stats);
    const auto minus = minus_side(c.profiles), plus = plus_side(c.profiles);
    r.branches.reserve(raw.size());
    for (auto& b : raw) r.branches.push_back(classify_asymptotics(std::move(b), minus, plus, kAsymptoteTol));
    return r;
}

// ---- flow -------------------------------------------------------------------

struct FlowResult {
    std::vector<FlowRow> rows;
    bool all_reconciled = true;
};

inline FlowResult run_flow(const RunConfig& c, const std::vector<Branch>& branches) {
    // A level at alpha is reported as such before any window check.
    for (double a : c.alphas) predicted_sf(c.profiles, a);
    std::optional<CrossingRefiner> refiner;
    if (c.refine_crossings) refiner = CrossingRefiner{c.grid, c.profiles};
    FlowResult out;
    out.rows = parallel_map<FlowRow>(c.alphas.size(), c.sweep.workers, [&](std::size_t k) {
        const double a = c.alphas[k];
        FlowRow row{{}, c.density.for_alpha(c.profiles, a), false};
        row.report = analyze_flow(branches, c.profiles, a, row.density, c.window_margin, refiner ? &*refiner : nullptr);
        row.reconciled = reconcile(row.report, predicted_sf(c.profiles, a));
        return row;
    });
    for (const auto& r : out.rows) out.all_reconciled = out.all_reconciled && r.reconciled;
    return out;
}

// ---- oracle -----------------------------------------------------------------

struct OracleOutcome {
    OracleExperiment experiment;
    StabilityTable table;
    bool seam_ok = true;
    bool pass() const { return table.stable && seam_ok; }
};

struct OracleResult {
    std::vector<OracleOutcome> outcomes;
    long predicted = 0;  // fiber-side prediction at the centre of the phi window
    bool tagged_pass = true;
};

inline OracleResult run_oracle(const RunConfig& c) {
    const OracleSpec spec = c.oracle ? *c.oracle : OracleSpec::defaults();
    spec.grid.validate();  // budget before any work
    OracleResult out;
    out.predicted = predicted_sf(c.profiles, 0.5 * (spec.density.E1() + spec.density.E2())).sf;
    out.outcomes = parallel_map<OracleOutcome>(spec.experiments.size(), c.sweep.workers, [&](std::size_t k) {
        const auto& e = spec.experiments[k];
        OracleOutcome o{e, stability_experiment(c.profiles, e.perturbation, e.couplings, spec.grid, spec.projection,
                                                spec.density),
                        true};
        for (const auto& r : o.table.rows) o.seam_ok = o.seam_ok && r.seam_residual < kSeamTol;
        return o;
    });
    for (const auto& o : out.outcomes)
        if (o.experiment.tagged) out.tagged_pass = out.tagged_pass && o.pass();
    return out;
}

inline nlohmann::json to_json(const OracleOutcome& o) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : o.table.rows)
        rows.push_back({{"coupling", r.coupling},
                        {"two_pi_sigma", r.two_pi_sigma},
                        {"seam_residual", r.seam_residual},
                        {"literal_difference", r.literal_difference}});
    nlohmann::json j = {{"name", o.experiment.name},
                        {"tagged", o.experiment.tagged},
                        {"unperturbed", o.table.unperturbed},
                        {"reference", o.table.reference},
                        {"verdict", o.table.stable ? "stable" : "unstable"},
                        {"seam_ok", o.seam_ok},
                        {"rows", rows}};
    j["breakdown_coupling"] = o.table.breakdown ? nlohmann::json(*o.table.breakdown) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json manifest_base(const RunConfig& c, const std::string& verb) {
    return {{"tool", "magflow"},
            {"version", kVersion},
            {"verb", verb},
            {"config", to_json(c)},
            {"tolerances", tolerances_json(c)}};
}

}  // namespace magflow
