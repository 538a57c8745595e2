#pragma once
//
// The eight figure panels as ready-made scenarios.
//

#include <string>
#include <vector>

#include "magflow/branches.hpp"
#include "magflow/error.hpp"
#include "magflow/fiber.hpp"
#include "magflow/profiles.hpp"

namespace magflow {

struct Scenario {
    std::string name;
    std::string title;
    ProfileSet profiles;
    Grid1D grid;
    SweepConfig sweep;
    std::vector<double> alphas;
};

namespace detail {

inline SwitchProfile domain_wall(double minus, double plus) {
    return {minus, plus, -1.0, 1.0, SwitchShape::smooth_bump};
}

inline Scenario panel(std::string name, std::string title, double Bm, double Bp, double mm, double mp, double Vm,
                      double Vp, std::vector<double> alphas) {
    Scenario s;
    s.name = std::move(name);
    s.title = std::move(title);
    s.profiles = {domain_wall(Bm, Bp), domain_wall(mm, mp), domain_wall(Vm, Vp)};
    s.grid = {20.0, 800, BoundaryCondition::dirichlet};
    // A constant positive field puts the stencil's reversed-chirality copy at
    // x = (zeta - 2/h) / B; N = 1200 keeps it off [-L, L] for |zeta| <= 8.
    if (Bm > 0 && Bp > 0) s.grid.N = 1200;
    s.alphas = std::move(alphas);
    return s;
}

}  // namespace detail

inline std::vector<Scenario> figure_presets() {
    using detail::panel;
    return {
        panel("fig1_top_left", "B = 2, m = 2", 2, 2, 2, 2, 0, 0, {0.1}),
        panel("fig1_top_right", "B = 2, m+ = 2 = -m-", 2, 2, -2, 2, 0, 0, {0.1}),
        panel("fig1_bottom_left", "B+ = 2 = -B-, m = 0", -2, 2, 0, 0, 0, 0, {0.1, 1.0}),
        panel("fig1_bottom_right", "B+ = 2 = -B-, m = 2", -2, 2, 2, 2, 0, 0, {0.1}),
        panel("fig2_top_left", "B+ = 2 = -B-, m+ = 2 = -m-, V = 0", -2, 2, -2, 2, 0, 0, {0.0}),
        panel("fig2_top_right", "B+ = 2 = -B-, m+ = 2 = -m-, V+ = 0.1 = -V-", -2, 2, -2, 2, -0.1, 0.1, {0.0, 2.5}),
        panel("fig2_bottom_left", "B+ = 2 = -B-, m+ = 2 = -m-, V+ = 0.5 = -V-", -2, 2, -2, 2, -0.5, 0.5, {0.0}),
        panel("fig2_bottom_right", "B+ = 2 = -B-, m+ = 2 = -m-, V+ = 2 = -V-", -2, 2, -2, 2, -2, 2, {0.4}),
    };
}

inline Scenario find_preset(const std::string& name) {
    for (auto& s : figure_presets())
        if (s.name == name) return s;
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace magflow
