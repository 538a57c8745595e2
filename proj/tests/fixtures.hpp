#pragma once

#include <map>
#include <string>

#include "magflow/branches.hpp"
#include "magflow/presets.hpp"

namespace fixtures {

/// Sweeps are expensive; each preset is swept once per test binary.
inline const std::vector<magflow::Branch>& branches_of(const std::string& preset) {
    static std::map<std::string, std::vector<magflow::Branch>> cache;
    auto it = cache.find(preset);
    if (it == cache.end()) {
        const auto s = magflow::find_preset(preset);
        it = cache.emplace(preset, magflow::sweep_branches(s.grid, s.profiles, s.sweep,
                                                           magflow::SpuriousFilter::defaults(s.grid)))
                 .first;
    }
    return it->second;
}

}  // namespace fixtures
