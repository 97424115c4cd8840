#pragma once

#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "chemotaxsim/diagnostics.hpp"
#include "chemotaxsim/diffusion.hpp"
#include "chemotaxsim/grid.hpp"
#include "chemotaxsim/model.hpp"
#include "chemotaxsim/run.hpp"
#include "chemotaxsim/stepper.hpp"

namespace chemotaxsim {

struct RunConfig {
    enum class Mode { run, sweep, ladder, audit };

    GridSpec grid;
    double delta = 1.0;
    double m = 2.0;
    std::string kind = "power";
    double d0 = 0.0;
    double eps = 0.0; // optional shift applied to the model
    InitialPreset initial;
    SchemeConfig scheme;
    DiagConfig diag;
    std::string output_dir = "out";
    bool snapshots = false;
    Mode mode = Mode::run;
    Formulation form = Formulation::uv;
    std::vector<double> sweep_m;
    int sweep_trials = 1;
    std::vector<double> ladder_eps;
    std::string audit_input;
    std::string raw_text;

    DiffusionSpec make_spec() const {
        DiffusionSpec s = (kind == "power_offset") ? DiffusionSpec::power_offset(delta, m, d0)
                                                   : DiffusionSpec::power(delta, m);
        if (eps > 0.0) s = s.shifted(eps);
        return s;
    }
};

namespace detail {

struct ConfigParser {
    std::vector<std::string> errors;

    bool to_double(const std::string& key, const std::string& val, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(val, &pos);
            if (pos != val.size()) throw std::invalid_argument("");
            return true;
        } catch (...) {
            errors.push_back(key + ": expected a real number, got '" + val + "'");
            return false;
        }
    }
    bool to_int(const std::string& key, const std::string& val, int& out) {
        try {
            std::size_t pos = 0;
            out = std::stoi(val, &pos);
            if (pos != val.size()) throw std::invalid_argument("");
            return true;
        } catch (...) {
            errors.push_back(key + ": expected an integer, got '" + val + "'");
            return false;
        }
    }
    bool to_u64(const std::string& key, const std::string& val, std::uint64_t& out) {
        try {
            std::size_t pos = 0;
            out = std::stoull(val, &pos);
            if (pos != val.size()) throw std::invalid_argument("");
            return true;
        } catch (...) {
            errors.push_back(key + ": expected an unsigned integer, got '" + val + "'");
            return false;
        }
    }
    bool to_bool(const std::string& key, const std::string& val, bool& out) {
        if (val == "true" || val == "1" || val == "yes") { out = true; return true; }
        if (val == "false" || val == "0" || val == "no") { out = false; return true; }
        errors.push_back(key + ": expected a boolean, got '" + val + "'");
        return false;
    }
    static std::vector<std::string> split(const std::string& val) {
        std::vector<std::string> out;
        std::istringstream is(val);
        std::string item;
        while (std::getline(is, item, ',')) {
            auto b = item.find_first_not_of(" \t");
            auto e = item.find_last_not_of(" \t");
            out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
        }
        return out;
    }
    bool to_double_list(const std::string& key, const std::string& val, std::vector<double>& out) {
        out.clear();
        for (auto& s : split(val)) {
            double d;
            if (!to_double(key, s, d)) return false;
            out.push_back(d);
        }
        return true;
    }
    bool to_int_list(const std::string& key, const std::string& val, std::vector<int>& out) {
        out.clear();
        for (auto& s : split(val)) {
            int d;
            if (!to_int(key, s, d)) return false;
            out.push_back(d);
        }
        return true;
    }
};

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

// Flat `section.key = value` configuration. Collects every violation before
// rejecting so the user sees all problems at once.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.raw_text = text;
    detail::ConfigParser P;

    int grid_dim = 0;
    std::vector<int> grid_cells;
    std::vector<double> grid_lengths;
    bool grid_seen = false;
    std::vector<std::string> pr_raw;

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            P.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));

        if (key == "grid.dim") { grid_seen = true; P.to_int(key, val, grid_dim); }
        else if (key == "grid.cells") { grid_seen = true; P.to_int_list(key, val, grid_cells); }
        else if (key == "grid.lengths") { grid_seen = true; P.to_double_list(key, val, grid_lengths); }
        else if (key == "model.delta") P.to_double(key, val, cfg.delta);
        else if (key == "model.m") P.to_double(key, val, cfg.m);
        else if (key == "model.kind") {
            if (val == "power" || val == "power_offset") cfg.kind = val;
            else P.errors.push_back("model.kind: must be power or power_offset");
        }
        else if (key == "model.d0") P.to_double(key, val, cfg.d0);
        else if (key == "model.eps") P.to_double(key, val, cfg.eps);
        else if (key == "initial.preset") {
            if (val == "constant") cfg.initial.kind = InitialPreset::Kind::constant;
            else if (val == "gaussian_bump") cfg.initial.kind = InitialPreset::Kind::gaussian_bump;
            else if (val == "perturbed_constant") cfg.initial.kind = InitialPreset::Kind::perturbed_constant;
            else if (val == "seeded_random") cfg.initial.kind = InitialPreset::Kind::seeded_random;
            else P.errors.push_back("initial.preset: unknown preset '" + val + "'");
        }
        else if (key == "initial.u") P.to_double(key, val, cfg.initial.u_value);
        else if (key == "initial.v") P.to_double(key, val, cfg.initial.v_value);
        else if (key == "initial.amplitude") P.to_double(key, val, cfg.initial.amplitude);
        else if (key == "initial.width") P.to_double(key, val, cfg.initial.width);
        else if (key == "initial.background") P.to_double(key, val, cfg.initial.background);
        else if (key == "initial.v_dip") P.to_double(key, val, cfg.initial.v_dip);
        else if (key == "initial.center") {
            std::vector<double> c;
            if (P.to_double_list(key, val, c))
                for (std::size_t a = 0; a < c.size() && a < 3; ++a) cfg.initial.center[a] = c[a];
        }
        else if (key == "initial.a") P.to_double(key, val, cfg.initial.perturb_amp);
        else if (key == "initial.modes") {
            std::vector<int> mlist;
            if (P.to_int_list(key, val, mlist))
                for (std::size_t a = 0; a < mlist.size() && a < 3; ++a) cfg.initial.modes[a] = mlist[a];
        }
        else if (key == "initial.u_min") P.to_double(key, val, cfg.initial.u_min);
        else if (key == "initial.u_max") P.to_double(key, val, cfg.initial.u_max);
        else if (key == "initial.v_min") P.to_double(key, val, cfg.initial.v_min);
        else if (key == "initial.v_max") P.to_double(key, val, cfg.initial.v_max);
        else if (key == "initial.seed") P.to_u64(key, val, cfg.initial.seed);
        else if (key == "scheme.cfl_safety") P.to_double(key, val, cfg.scheme.cfl_safety);
        else if (key == "scheme.face_average") {
            if (val == "arithmetic") cfg.scheme.face_average = SchemeConfig::FaceAverage::arithmetic;
            else if (val == "harmonic") cfg.scheme.face_average = SchemeConfig::FaceAverage::harmonic;
            else P.errors.push_back("scheme.face_average: must be arithmetic or harmonic");
        }
        else if (key == "scheme.v_solver_tol") P.to_double(key, val, cfg.scheme.v_solver_tol);
        else if (key == "scheme.v_solver_max_iters") P.to_int(key, val, cfg.scheme.v_solver_max_iters);
        else if (key == "scheme.dt_max") P.to_double(key, val, cfg.scheme.dt_max);
        else if (key == "scheme.t_end") P.to_double(key, val, cfg.scheme.t_end);
        else if (key == "scheme.sample_every") P.to_double(key, val, cfg.scheme.sample_every);
        else if (key == "scheme.overflow_factor") P.to_double(key, val, cfg.scheme.overflow_factor);
        else if (key == "diagnostics.p_list") P.to_double_list(key, val, cfg.diag.p_list);
        else if (key == "diagnostics.pr_list") pr_raw = detail::ConfigParser::split(val);
        else if (key == "diagnostics.energy_slack") P.to_double(key, val, cfg.diag.energy_slack);
        else if (key == "diagnostics.w_cap") P.to_double(key, val, cfg.diag.w_cap);
        else if (key == "output.directory") cfg.output_dir = val;
        else if (key == "output.snapshots") P.to_bool(key, val, cfg.snapshots);
        else if (key == "mode") {
            if (val == "run") cfg.mode = RunConfig::Mode::run;
            else if (val == "sweep") cfg.mode = RunConfig::Mode::sweep;
            else if (val == "ladder") cfg.mode = RunConfig::Mode::ladder;
            else if (val == "audit") cfg.mode = RunConfig::Mode::audit;
            else P.errors.push_back("mode: must be run, sweep, ladder or audit");
        }
        else if (key == "formulation") {
            if (val == "uv") cfg.form = Formulation::uv;
            else if (val == "uw") cfg.form = Formulation::uw;
            else P.errors.push_back("formulation: must be uv or uw");
        }
        else if (key == "sweep.m_list") P.to_double_list(key, val, cfg.sweep_m);
        else if (key == "sweep.trials") P.to_int(key, val, cfg.sweep_trials);
        else if (key == "ladder.eps_list") P.to_double_list(key, val, cfg.ladder_eps);
        else if (key == "audit.input") cfg.audit_input = val;
        else P.errors.push_back("unknown key '" + key + "'");
    }

    // pr pairs in `p:r` notation
    for (auto& s : pr_raw) {
        auto colon = s.find(':');
        if (colon == std::string::npos) {
            P.errors.push_back("diagnostics.pr_list: expected p:r pairs, got '" + s + "'");
            continue;
        }
        double p, r;
        if (P.to_double("diagnostics.pr_list", s.substr(0, colon), p) &&
            P.to_double("diagnostics.pr_list", s.substr(colon + 1), r))
            cfg.diag.pr_list.emplace_back(p, r);
    }

    // cross-field constraints
    if (cfg.mode != RunConfig::Mode::audit) {
        if (!grid_seen) P.errors.push_back("missing grid block (grid.dim, grid.cells, grid.lengths)");
        else {
            try {
                cfg.grid = GridSpec::make(grid_dim, grid_cells, grid_lengths);
            } catch (const parameter_error& e) {
                P.errors.push_back(std::string("grid: ") + e.what());
            }
        }
    }
    if (!(cfg.delta > 0.0)) P.errors.push_back("model.delta must be > 0");
    if (!(cfg.m >= 1.0)) P.errors.push_back("model.m must be >= 1 (diffusion class constraint)");
    if (cfg.kind == "power_offset" && !(cfg.d0 > 0.0))
        P.errors.push_back("model.d0 must be > 0 for power_offset");
    if (cfg.eps < 0.0) P.errors.push_back("model.eps must be >= 0");
    try {
        cfg.scheme.validate();
    } catch (const parameter_error& e) {
        P.errors.push_back(std::string("scheme: ") + e.what());
    }
    if (cfg.mode == RunConfig::Mode::sweep) {
        if (cfg.sweep_m.empty()) P.errors.push_back("sweep mode requires a nonempty sweep.m_list");
        for (double mm : cfg.sweep_m)
            if (!(mm >= 1.0)) P.errors.push_back("sweep.m_list entries must be >= 1");
        if (cfg.sweep_trials < 1) P.errors.push_back("sweep.trials must be >= 1");
    }
    if (cfg.mode == RunConfig::Mode::ladder) {
        if (cfg.ladder_eps.empty()) P.errors.push_back("ladder mode requires a nonempty ladder.eps_list");
        for (std::size_t i = 0; i < cfg.ladder_eps.size(); ++i) {
            if (!(cfg.ladder_eps[i] > 0.0)) P.errors.push_back("ladder.eps_list entries must be > 0");
            else if (i > 0 && !(cfg.ladder_eps[i] < cfg.ladder_eps[i - 1]))
                P.errors.push_back("ladder.eps_list must be strictly decreasing");
        }
    }
    if (cfg.mode == RunConfig::Mode::audit && cfg.audit_input.empty())
        P.errors.push_back("audit mode requires audit.input");

    if (!P.errors.empty()) {
        std::string msg;
        for (auto& e : P.errors) msg += e + "\n";
        throw config_error(msg);
    }
    return cfg;
}

} // namespace chemotaxsim
