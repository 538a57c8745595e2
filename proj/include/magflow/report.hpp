#pragma once
//
// CSV, SVG and manifest emission. Numbers use shortest round-trip formatting so
// reruns of the same config give byte-identical files.
//

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "magflow/branches.hpp"
#include "magflow/bulk.hpp"
#include "magflow/error.hpp"
#include "magflow/flow.hpp"
#include "magflow/oracle2d.hpp"

namespace magflow {

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ExitCode::failure, "cannot write '" + p.string() + "'");
    out << text;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

// ---- CSV --------------------------------------------------------------------

inline std::string branches_csv(const std::vector<Branch>& branches) {
    std::ostringstream os;
    os << "branch_id,zeta,mu,overlap,boundary_mass\n";
    for (const auto& b : branches)
        for (std::size_t k = 0; k < b.size(); ++k)
            os << b.id << ',' << num(b.zetas[k]) << ',' << num(b.mus[k]) << ',' << num(b.overlaps[k]) << ','
               << num(b.boundary_masses[k]) << '\n';
    return os.str();
}

struct FlowRow {
    FlowReport report;
    DensityProfile density;
    bool reconciled = false;
};

inline std::string flow_csv(const std::vector<FlowRow>& rows) {
    std::ostringstream os;
    os << "alpha,alpha_used,sf_numeric,sf_endpoint,sf_predicted,two_pi_sigma,two_pi_sigma_integral,E1,E2,ups,downs,"
          "reconciled\n";
    for (const auto& r : rows) {
        const auto& f = r.report;
        os << num(f.alpha) << ',' << num(f.alpha_used) << ',' << f.sf_numeric << ',' << f.sf_endpoint << ','
           << (f.sf_predicted ? std::to_string(*f.sf_predicted) : "") << ',' << num(f.two_pi_sigma) << ','
           << num(f.two_pi_sigma_integral) << ',' << num(r.density.E1()) << ',' << num(r.density.E2()) << ','
           << f.ups() << ',' << f.downs() << ',' << (r.reconciled ? "true" : "false") << '\n';
    }
    return os.str();
}

inline std::string crossings_csv(const std::vector<FlowRow>& rows) {
    std::ostringstream os;
    os << "alpha,branch_id,zeta,direction,refined\n";
    for (const auto& r : rows)
        for (const auto& c : r.report.crossings)
            os << num(r.report.alpha) << ',' << c.branch_id << ',' << num(c.zeta) << ',' << to_string(c.direction)
               << ',' << (c.refined ? "true" : "false") << '\n';
    return os.str();
}

struct BulkRow {
    double alpha = 0.0;
    FlowPrediction pred;
};

inline std::string bulk_csv(const HalfSpaceParams& minus, const HalfSpaceParams& plus, const EnergyWindow& w,
                            const std::vector<BulkRow>& rows) {
    std::ostringstream os;
    os << "kind,side,alpha,value\n";
    for (double l : levels_in(minus, w.lo, w.hi)) os << "level,minus,," << num(l) << '\n';
    for (double l : levels_in(plus, w.lo, w.hi)) os << "level,plus,," << num(l) << '\n';
    for (const auto& r : rows) {
        os << "N,minus," << num(r.alpha) << ',' << r.pred.N_minus << '\n';
        os << "N,plus," << num(r.alpha) << ',' << r.pred.N_plus << '\n';
        os << "I,minus," << num(r.alpha) << ',' << num(0.5 * r.pred.I_minus.twice) << '\n';
        os << "I,plus," << num(r.alpha) << ',' << num(0.5 * r.pred.I_plus.twice) << '\n';
        os << "SF_pred,," << num(r.alpha) << ',' << r.pred.sf << '\n';
    }
    return os.str();
}

struct OracleRow {
    std::string scenario;
    StabilityRow row;
};

inline std::string oracle_csv(const std::vector<OracleRow>& rows) {
    std::ostringstream os;
    os << "scenario,coupling,two_pi_sigma,seam_residual,literal_difference\n";
    for (const auto& r : rows)
        os << r.scenario << ',' << num(r.row.coupling) << ',' << num(r.row.two_pi_sigma) << ','
           << num(r.row.seam_residual) << ',' << num(r.row.literal_difference) << '\n';
    return os.str();
}

// ---- SVG --------------------------------------------------------------------

/// (zeta, mu) polylines in a fixed 800x600 viewBox, clipped to the energy window.
inline std::string branches_svg(const std::vector<Branch>& branches, double zeta_min, double zeta_max,
                                const EnergyWindow& w, const std::string& title, const std::vector<double>& alphas = {}) {
    const double X0 = 70, X1 = 780, Y0 = 40, Y1 = 550;
    auto px = [&](double z) { return X0 + (z - zeta_min) / (zeta_max - zeta_min) * (X1 - X0); };
    auto py = [&](double mu) { return Y1 - (mu - w.lo) / (w.hi - w.lo) * (Y1 - Y0); };
    auto f = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
    os << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    os << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << title
       << "</text>\n";
    os << "<rect x=\"" << X0 << "\" y=\"" << Y0 << "\" width=\"" << X1 - X0 << "\" height=\"" << Y1 - Y0
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    // ticks: integers in zeta, every unit in mu
    for (int z = static_cast<int>(std::ceil(zeta_min)); z <= static_cast<int>(std::floor(zeta_max)); ++z) {
        const double x = px(z);
        os << "<line x1=\"" << f(x) << "\" y1=\"" << Y1 << "\" x2=\"" << f(x) << "\" y2=\"" << Y1 + 6
           << "\" stroke=\"black\"/>";
        if (z % 2 == 0)
            os << "<text x=\"" << f(x) << "\" y=\"" << Y1 + 20 << "\" text-anchor=\"middle\" font-size=\"12\">" << z
               << "</text>";
        os << "\n";
    }
    for (int m = static_cast<int>(std::ceil(w.lo)); m <= static_cast<int>(std::floor(w.hi)); ++m) {
        const double y = py(m);
        os << "<line x1=\"" << X0 - 6 << "\" y1=\"" << f(y) << "\" x2=\"" << X0 << "\" y2=\"" << f(y)
           << "\" stroke=\"black\"/><text x=\"" << X0 - 10 << "\" y=\"" << f(y + 4)
           << "\" text-anchor=\"end\" font-size=\"12\">" << m << "</text>\n";
    }
    os << "<text x=\"" << (X0 + X1) / 2 << "\" y=\"590\" text-anchor=\"middle\" font-size=\"14\">zeta</text>\n";
    os << "<text x=\"18\" y=\"" << (Y0 + Y1) / 2 << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
       << (Y0 + Y1) / 2 << ")\">mu</text>\n";
    for (double a : alphas)
        if (a > w.lo && a < w.hi)
            os << "<line x1=\"" << X0 << "\" y1=\"" << f(py(a)) << "\" x2=\"" << X1 << "\" y2=\"" << f(py(a))
               << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};
    for (const auto& b : branches) {
        if (b.size() == 0) continue;
        os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colors[b.id % 7] << "\" points=\"";
        for (std::size_t k = 0; k < b.size(); ++k) {
            const double mu = std::clamp(b.mus[k], w.lo, w.hi);
            os << (k ? " " : "") << f(px(b.zetas[k])) << ',' << f(py(mu));
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

// ---- manifest pieces --------------------------------------------------------

inline nlohmann::json to_json(const AsymptoteLabel& a) {
    return {{"kind", to_string(a.kind)}, {"value", a.value}, {"side", to_string(a.side)}};
}

inline nlohmann::json branch_summary(const Branch& b) {
    nlohmann::json j = {{"id", b.id},
                        {"samples", b.size()},
                        {"zeta_first", b.size() ? b.zetas.front() : 0.0},
                        {"zeta_last", b.size() ? b.zetas.back() : 0.0},
                        {"mu_first", b.size() ? b.mus.front() : 0.0},
                        {"mu_last", b.size() ? b.mus.back() : 0.0},
                        {"min_overlap", b.min_overlap},
                        {"start", to_string(b.start)},
                        {"end", to_string(b.end)}};
    j["asymptote_lo"] = b.asymptote_lo ? to_json(*b.asymptote_lo) : nlohmann::json(nullptr);
    j["asymptote_hi"] = b.asymptote_hi ? to_json(*b.asymptote_hi) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const SweepStats& s) {
    return {{"solves", s.solves},
            {"bisections", s.bisections},
            {"cluster_rotations", s.cluster_rotations},
            {"smallest_step", s.smallest_step},
            {"max_residual", s.max_residual}};
}

inline nlohmann::json to_json(const FlowRow& r) {
    const auto& f = r.report;
    nlohmann::json j = {{"alpha", f.alpha},
                        {"alpha_used", f.alpha_used},
                        {"alpha_shifts", f.alpha_shifts},
                        {"sf_numeric", f.sf_numeric},
                        {"sf_endpoint", f.sf_endpoint},
                        {"two_pi_sigma", f.two_pi_sigma},
                        {"two_pi_sigma_integral", f.two_pi_sigma_integral},
                        {"E1", r.density.E1()},
                        {"E2", r.density.E2()},
                        {"window_valid", f.window_valid},
                        {"reconciled", r.reconciled}};
    j["sf_predicted"] = f.sf_predicted ? nlohmann::json(*f.sf_predicted) : nlohmann::json(nullptr);
    return j;
}

}  // namespace magflow
