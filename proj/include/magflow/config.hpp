#pragma once
//
// Run configuration as JSON. Unknown keys are rejected and to_json writes every
// field back out, so a manifest's "config" block replays the run as-is.
//

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "magflow/branches.hpp"
#include "magflow/error.hpp"
#include "magflow/fiber.hpp"
#include "magflow/flow.hpp"
#include "magflow/oracle2d.hpp"
#include "magflow/presets.hpp"
#include "magflow/profiles.hpp"

namespace magflow {

using json = nlohmann::json;

/// phi' support: "auto" centres a window of half_width on each alpha (clipped
/// to the gap component), "fixed" uses [E1, E2] for every alpha.
struct DensitySpec {
    std::string mode = "auto";
    double half_width = 0.5;
    double E1 = -0.5;
    double E2 = 0.5;
    SwitchShape shape = SwitchShape::smooth_bump;

    DensityProfile for_alpha(const ProfileSet& ps, double alpha) const {
        if (mode == "fixed") return DensityProfile::window(E1, E2, shape);
        auto d = density_around(minus_side(ps), plus_side(ps), alpha, half_width);
        d.phi.shape = shape;
        return d;
    }
};

struct OracleExperiment {
    std::string name;
    PerturbationSpec perturbation;
    std::vector<double> couplings;
    bool tagged = true;  // counts toward the exit code
};

struct OracleSpec {
    Grid2D grid;
    SwitchProfile projection{0.0, 1.0, -1.0, 1.0, SwitchShape::smooth_bump};
    DensityProfile density = DensityProfile::window(-0.5, 0.5);
    std::vector<OracleExperiment> experiments;

    /// The three perturbation families plus an untagged onset sweep past the gap.
    static OracleSpec defaults() {
        OracleSpec o;
        o.experiments = {
            {"strip_mult_x", {PerturbationKind::mult_x, 0.5, 2.0, 0.5}, {0.0, 0.5, 1.0}, true},
            {"compact_decay_xy", {PerturbationKind::decay_xy, 0.3, 2.0, 0.5}, {0.0, 1.0}, true},
            {"small_decay_y", {PerturbationKind::decay_y, 1.0, 2.0, 0.5}, {0.0, 0.05}, true},
            {"onset_mult_x", {PerturbationKind::mult_x, 4.0, 2.0, 0.5}, {0.25, 0.5, 0.75, 1.0}, false},
        };
        return o;
    }
};

struct RunConfig {
    std::string scenario = "custom";
    std::string title;
    ProfileSet profiles;
    Grid1D grid{20.0, 800, BoundaryCondition::dirichlet};
    SweepConfig sweep;
    SpuriousFilter filter = SpuriousFilter::defaults(grid);
    std::vector<double> alphas{0.0};
    DensitySpec density;
    double window_margin = kWindowMargin;
    bool refine_crossings = true;
    std::optional<OracleSpec> oracle;
    std::string output = "out";
    std::uint64_t seed = 0;

    void validate() const {
        profiles.validate();
        grid.validate();
        sweep.validate();
        filter.validate(grid);
        if (alphas.empty()) throw ConfigError("config: alphas must not be empty");
        if (density.mode != "auto" && density.mode != "fixed") throw ConfigError("config: density.mode is auto or fixed");
        if (!(window_margin >= 0.0)) throw ConfigError("config: window_margin must be >= 0");
        if (oracle) {
            oracle->grid.validate();
            for (const auto& e : oracle->experiments) {
                e.perturbation.validate();
                for (double c : e.couplings)
                    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("config: oracle couplings must lie in [0, 1]");
            }
        }
    }
};

inline RunConfig config_from_scenario(const Scenario& s) {
    RunConfig c;
    c.scenario = s.name;
    c.title = s.title;
    c.profiles = s.profiles;
    c.grid = s.grid;
    c.sweep = s.sweep;
    c.filter = SpuriousFilter::defaults(s.grid);
    c.alphas = s.alphas;
    return c;
}

// ---- JSON out ---------------------------------------------------------------

inline json to_json(const SwitchProfile& p) {
    return {{"lower", p.lower}, {"upper", p.upper}, {"t_lo", p.t_lo}, {"t_hi", p.t_hi}, {"shape", to_string(p.shape)}};
}

inline json to_json(const Grid1D& g) { return {{"L", g.L}, {"N", g.N}, {"bc", to_string(g.bc)}}; }

inline json to_json(const SweepConfig& s) {
    return {{"zeta_min", s.zeta_min},
            {"zeta_max", s.zeta_max},
            {"samples", s.samples},
            {"window_lo", s.window.lo},
            {"window_hi", s.window.hi},
            {"refine_tol", s.refine_tol},
            {"overlap_threshold", s.overlap_threshold},
            {"min_step", s.min_step},
            {"candidate_cutoff", s.candidate_cutoff},
            {"cluster_tol", s.cluster_tol},
            {"chunk", s.chunk},
            {"workers", s.workers}};
}

inline json to_json(const PerturbationSpec& w) {
    return {{"kind", to_string(w.kind)}, {"amplitude", w.amplitude}, {"support", w.support}, {"delta", w.delta}};
}

inline json to_json(const OracleSpec& o) {
    json ex = json::array();
    for (const auto& e : o.experiments)
        ex.push_back({{"name", e.name},
                      {"perturbation", to_json(e.perturbation)},
                      {"couplings", e.couplings},
                      {"tagged", e.tagged}});
    return {{"grid",
             {{"L", o.grid.grid_x.L},
              {"N", o.grid.grid_x.N},
              {"bc", to_string(o.grid.grid_x.bc)},
              {"Ly", o.grid.Ly},
              {"Ny", o.grid.Ny},
              {"max_dim", o.grid.max_dim}}},
            {"projection", to_json(o.projection)},
            {"density", {{"E1", o.density.E1()}, {"E2", o.density.E2()}, {"shape", to_string(o.density.phi.shape)}}},
            {"experiments", ex}};
}

inline json to_json(const RunConfig& c) {
    json j = {{"scenario", c.scenario},
              {"title", c.title},
              {"profiles", {{"B", to_json(c.profiles.B)}, {"m", to_json(c.profiles.m)}, {"V", to_json(c.profiles.V)}}},
              {"grid", to_json(c.grid)},
              {"sweep", to_json(c.sweep)},
              {"filter", {{"margin", c.filter.margin}, {"threshold", c.filter.threshold}}},
              {"alphas", c.alphas},
              {"density",
               {{"mode", c.density.mode},
                {"half_width", c.density.half_width},
                {"E1", c.density.E1},
                {"E2", c.density.E2},
                {"shape", to_string(c.density.shape)}}},
              {"window_margin", c.window_margin},
              {"refine_crossings", c.refine_crossings},
              {"output", c.output},
              {"seed", c.seed}};
    j["oracle"] = c.oracle ? to_json(*c.oracle) : json(nullptr);
    return j;
}

// ---- JSON in ----------------------------------------------------------------

namespace detail {

inline void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ConfigError("config: unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + where + (where.empty() ? "" : ".") + key + "': " + e.what());
    }
}

inline void read_profile(const json& j, SwitchProfile& p, const std::string& where) {
    only_keys(j, {"lower", "upper", "t_lo", "t_hi", "shape"}, where);
    read(j, "lower", p.lower, where);
    read(j, "upper", p.upper, where);
    read(j, "t_lo", p.t_lo, where);
    read(j, "t_hi", p.t_hi, where);
    std::string shape(to_string(p.shape));
    read(j, "shape", shape, where);
    p.shape = parse_shape(shape);
}

inline void read_grid(const json& j, Grid1D& g, const std::string& where) {
    std::string bc(to_string(g.bc));
    read(j, "L", g.L, where);
    read(j, "N", g.N, where);
    read(j, "bc", bc, where);
    g.bc = parse_bc(bc);
}

inline void read_perturbation(const json& j, PerturbationSpec& w, const std::string& where) {
    only_keys(j, {"kind", "amplitude", "support", "delta"}, where);
    std::string kind(to_string(w.kind));
    read(j, "kind", kind, where);
    w.kind = parse_perturbation(kind);
    read(j, "amplitude", w.amplitude, where);
    read(j, "support", w.support, where);
    read(j, "delta", w.delta, where);
}

inline OracleSpec read_oracle(const json& j) {
    OracleSpec o = OracleSpec::defaults();
    only_keys(j, {"grid", "projection", "density", "experiments"}, "oracle");
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        only_keys(g, {"L", "N", "bc", "Ly", "Ny", "max_dim"}, "oracle.grid");
        read_grid(g, o.grid.grid_x, "oracle.grid");
        read(g, "Ly", o.grid.Ly, "oracle.grid");
        read(g, "Ny", o.grid.Ny, "oracle.grid");
        read(g, "max_dim", o.grid.max_dim, "oracle.grid");
    }
    if (j.contains("projection")) read_profile(j["projection"], o.projection, "oracle.projection");
    if (j.contains("density")) {
        const auto& d = j["density"];
        only_keys(d, {"E1", "E2", "shape"}, "oracle.density");
        double e1 = o.density.E1(), e2 = o.density.E2();
        std::string shape(to_string(o.density.phi.shape));
        read(d, "E1", e1, "oracle.density");
        read(d, "E2", e2, "oracle.density");
        read(d, "shape", shape, "oracle.density");
        o.density = DensityProfile::window(e1, e2, parse_shape(shape));
    }
    if (j.contains("experiments")) {
        if (!j["experiments"].is_array()) throw ConfigError("config: oracle.experiments must be an array");
        o.experiments.clear();
        for (const auto& e : j["experiments"]) {
            only_keys(e, {"name", "perturbation", "couplings", "tagged"}, "oracle.experiments[]");
            OracleExperiment x;
            read(e, "name", x.name, "oracle.experiments[]");
            if (e.contains("perturbation")) read_perturbation(e["perturbation"], x.perturbation, "oracle.experiments[].perturbation");
            read(e, "couplings", x.couplings, "oracle.experiments[]");
            read(e, "tagged", x.tagged, "oracle.experiments[]");
            o.experiments.push_back(std::move(x));
        }
    }
    return o;
}

}  // namespace detail

/// Missing keys take defaults; if "scenario" names a preset, the preset supplies them.
inline RunConfig parse_config(const json& j) {
    using namespace detail;
    only_keys(j,
              {"scenario", "title", "profiles", "grid", "sweep", "filter", "alphas", "density", "window_margin",
               "refine_crossings", "oracle", "output", "seed"},
              "");
    RunConfig c;
    if (j.contains("scenario") && j["scenario"].is_string()) {
        const auto name = j["scenario"].get<std::string>();
        for (const auto& s : figure_presets())
            if (s.name == name) c = config_from_scenario(s);
        c.scenario = name;
    }
    read(j, "title", c.title, "");
    if (j.contains("profiles")) {
        const auto& p = j["profiles"];
        only_keys(p, {"B", "m", "V"}, "profiles");
        if (p.contains("B")) read_profile(p["B"], c.profiles.B, "profiles.B");
        if (p.contains("m")) read_profile(p["m"], c.profiles.m, "profiles.m");
        if (p.contains("V")) read_profile(p["V"], c.profiles.V, "profiles.V");
    }
    bool grid_changed = false;
    if (j.contains("grid")) {
        only_keys(j["grid"], {"L", "N", "bc"}, "grid");
        read_grid(j["grid"], c.grid, "grid");
        grid_changed = true;
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        only_keys(s,
                  {"zeta_min", "zeta_max", "samples", "window_lo", "window_hi", "refine_tol", "overlap_threshold",
                   "min_step", "candidate_cutoff", "cluster_tol", "chunk", "workers"},
                  "sweep");
        read(s, "zeta_min", c.sweep.zeta_min, "sweep");
        read(s, "zeta_max", c.sweep.zeta_max, "sweep");
        read(s, "samples", c.sweep.samples, "sweep");
        read(s, "window_lo", c.sweep.window.lo, "sweep");
        read(s, "window_hi", c.sweep.window.hi, "sweep");
        read(s, "refine_tol", c.sweep.refine_tol, "sweep");
        read(s, "overlap_threshold", c.sweep.overlap_threshold, "sweep");
        read(s, "min_step", c.sweep.min_step, "sweep");
        read(s, "candidate_cutoff", c.sweep.candidate_cutoff, "sweep");
        read(s, "cluster_tol", c.sweep.cluster_tol, "sweep");
        read(s, "chunk", c.sweep.chunk, "sweep");
        read(s, "workers", c.sweep.workers, "sweep");
    }
    // The filter default scales with L.
    if (grid_changed) c.filter = SpuriousFilter::defaults(c.grid);
    if (j.contains("filter")) {
        only_keys(j["filter"], {"margin", "threshold"}, "filter");
        read(j["filter"], "margin", c.filter.margin, "filter");
        read(j["filter"], "threshold", c.filter.threshold, "filter");
    }
    read(j, "alphas", c.alphas, "");
    if (j.contains("density")) {
        const auto& d = j["density"];
        only_keys(d, {"mode", "half_width", "E1", "E2", "shape"}, "density");
        read(d, "mode", c.density.mode, "density");
        read(d, "half_width", c.density.half_width, "density");
        read(d, "E1", c.density.E1, "density");
        read(d, "E2", c.density.E2, "density");
        std::string shape(to_string(c.density.shape));
        read(d, "shape", shape, "density");
        c.density.shape = parse_shape(shape);
    }
    read(j, "window_margin", c.window_margin, "");
    read(j, "refine_crossings", c.refine_crossings, "");
    if (j.contains("oracle") && !j["oracle"].is_null()) c.oracle = read_oracle(j["oracle"]);
    read(j, "output", c.output, "");
    read(j, "seed", c.seed, "");
    c.validate();
    return c;
}

inline RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace magflow
