#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "chemotaxsim/config.hpp"
#include "chemotaxsim/ladder.hpp"

#define CHEMOTAXSIM_VERSION "chemotaxsim 0.1.0"

namespace chemotaxsim {

struct DriverOptions {
    bool dry_run = false;
    int jobs = 1;
    std::string output_override;
};

struct SweepRow {
    double m = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::completed;
    std::string reason;
    double max_sup_u = 0.0;
    double t_of_max = 0.0;
};

// One row per (m, trial); failures are recorded in the row, never abort the
// sweep. Rows are assembled in m-then-trial order regardless of scheduling.
inline std::vector<SweepRow> threshold_sweep(const RunConfig& base,
                                             const std::vector<double>& m_list, int trials,
                                             int jobs = 1) {
    if (m_list.empty()) throw parameter_error("threshold_sweep: empty m list");
    for (double m : m_list)
        if (!(m >= 1.0)) throw parameter_error("threshold_sweep: m values must be >= 1");
    if (trials < 1) throw parameter_error("threshold_sweep: trials must be >= 1");

    struct Job { double m; int trial; std::uint64_t seed; };
    std::vector<Job> plan;
    for (double m : m_list)
        for (int t = 0; t < trials; ++t)
            plan.push_back({m, t, base.initial.seed + static_cast<std::uint64_t>(t)});

    auto run_one = [&](const Job& jb) {
        SweepRow row;
        row.m = jb.m;
        row.trial = jb.trial;
        row.seed = jb.seed;
        try {
            InitialPreset p = base.initial;
            p.seed = jb.seed;
            InitialData data = make_initial(p, base.grid);
            DiffusionSpec spec = (base.kind == "power_offset")
                                     ? DiffusionSpec::power_offset(base.delta, jb.m, base.d0)
                                     : DiffusionSpec::power(base.delta, jb.m);
            if (base.eps > 0.0) spec = spec.shifted(base.eps);
            RunResult r = run(data, spec, base.scheme, base.form, base.diag);
            row.status = r.status;
            row.reason = r.reason;
            for (auto& rec : r.series)
                if (rec.sup_u > row.max_sup_u) { row.max_sup_u = rec.sup_u; row.t_of_max = rec.t; }
        } catch (const std::exception& e) {
            row.status = RunStatus::aborted;
            row.reason = e.what();
        }
        return row;
    };

    std::vector<SweepRow> rows(plan.size());
    if (jobs > 1) {
        std::vector<std::future<SweepRow>> futs;
        for (auto& jb : plan) futs.push_back(std::async(std::launch::async, run_one, jb));
        for (std::size_t i = 0; i < plan.size(); ++i) rows[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < plan.size(); ++i) rows[i] = run_one(plan[i]);
    }
    return rows;
}

namespace detail {

// All output files are written to a temp name and renamed on completion.
class AtomicFile {
public:
    explicit AtomicFile(const std::filesystem::path& target)
        : target_(target), tmp_(target.string() + ".tmp"), os_(tmp_) {
        if (!os_) throw io_error("cannot open file for writing", tmp_.string());
    }
    std::ofstream& stream() { return os_; }
    void commit() {
        os_.close();
        if (os_.fail()) throw io_error("write failed", tmp_.string());
        std::filesystem::rename(tmp_, target_);
    }

private:
    std::filesystem::path target_, tmp_;
    std::ofstream os_;
};

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) { h ^= c; h *= 1099511628211ull; }
    return h;
}

inline AuditReport standard_audits(const DiagSeries& series, const DiagConfig& dc) {
    AuditReport rep;
    const auto& recs = series.records;
    if (recs.size() >= 2) {
        rep.entries.push_back(audit_mass(recs));
        rep.entries.push_back(audit_energy_w(recs, recs.front().int_w, recs.front().mass_u,
                                             dc.energy_slack));
        rep.entries.push_back(audit_pointwise_bounds(recs, recs.front().max_v, dc.w_cap));
        rep.entries.push_back(
            audit_growth_envelope(recs, "int_u_pow_m1", EnvelopeShape::linear, dc));
        rep.entries.push_back(
            audit_growth_envelope(recs, "grad_um1_l2_cum", EnvelopeShape::linear, dc));
        rep.entries.push_back(audit_growth_envelope(recs, "mixed_cum", EnvelopeShape::linear, dc));
        for (std::size_t i = 0; i < dc.pr_list.size(); ++i) {
            const std::string name = "cum_" + short_num(dc.pr_list[i].first) + "_" +
                                     short_num(dc.pr_list[i].second);
            rep.entries.push_back(audit_growth_envelope(recs, name, EnvelopeShape::power, dc,
                                                        dc.pr_list[i].second));
        }
    }
    return rep;
}

} // namespace detail

// Orchestrates one configuration. Exit codes: 0 all audits pass, 1 an audit
// failed, 2 simulation aborted, 3 config error (raised by the caller at parse
// time), 4 I/O failure.
inline int execute(const RunConfig& cfg, const DriverOptions& opt, std::ostream& log) {
    const auto t_start = std::chrono::steady_clock::now();
    namespace fs = std::filesystem;
    const fs::path outdir = opt.output_override.empty() ? cfg.output_dir : opt.output_override;

    if (opt.dry_run) {
        log << "dry-run: mode=";
        switch (cfg.mode) {
        case RunConfig::Mode::run:
            log << "run, 1 run planned, formulation "
                << (cfg.form == Formulation::uv ? "uv" : "uw") << ", t_end=" << cfg.scheme.t_end;
            break;
        case RunConfig::Mode::sweep:
            log << "sweep, " << cfg.sweep_m.size() * cfg.sweep_trials << " runs planned:";
            for (double m : cfg.sweep_m)
                for (int t = 0; t < cfg.sweep_trials; ++t)
                    log << " (m=" << m << ",trial=" << t << ")";
            break;
        case RunConfig::Mode::ladder:
            log << "ladder, " << cfg.ladder_eps.size() << " rungs planned";
            break;
        case RunConfig::Mode::audit:
            log << "audit of " << cfg.audit_input;
            break;
        }
        log << "\n";
        return 0;
    }

    try {
        fs::create_directories(outdir);

        int code = 0;
        if (cfg.mode == RunConfig::Mode::run) {
            InitialData data = make_initial(cfg.initial, cfg.grid);
            DiffusionSpec spec = cfg.make_spec();
            long snap_idx = 0;
            std::function<void(const TrajectorySample&)> on_sample;
            if (cfg.snapshots)
                on_sample = [&](const TrajectorySample& s) {
                    std::ostringstream un, vn;
                    un << "u_" << std::setw(5) << std::setfill('0') << snap_idx << ".field";
                    vn << "v_" << std::setw(5) << std::setfill('0') << snap_idx << ".field";
                    write_chemofield((outdir / un.str()).string(), s.u, s.t);
                    write_chemofield((outdir / vn.str()).string(), s.v, s.t);
                    ++snap_idx;
                };
            RunResult r = run(data, spec, cfg.scheme, cfg.form, cfg.diag, false, on_sample);

            detail::AtomicFile diag(outdir / "diagnostics.csv");
            write_diag_header(diag.stream(), cfg.diag);
            for (auto& rec : r.series) write_diag_row(diag.stream(), rec);
            diag.commit();

            DiagSeries series{cfg.diag, r.series};
            AuditReport rep = detail::standard_audits(series, cfg.diag);
            detail::AtomicFile audit(outdir / "audit.txt");
            audit.stream() << "# run status: " << to_string(r.status)
                           << (r.reason.empty() ? "" : " (" + r.reason + ")") << "\n";
            rep.print(audit.stream());
            audit.commit();
            rep.print(log);
            if (r.status == RunStatus::aborted) code = 2;
            else if (!rep.all_pass()) code = 1;
        } else if (cfg.mode == RunConfig::Mode::sweep) {
            auto rows = threshold_sweep(cfg, cfg.sweep_m, cfg.sweep_trials, opt.jobs);
            detail::AtomicFile csv(outdir / "sweep.csv");
            csv.stream() << "m,trial,seed,status,max_sup_u,t_of_max\n" << std::setprecision(17);
            for (auto& row : rows)
                csv.stream() << row.m << "," << row.trial << "," << row.seed << ","
                             << to_string(row.status) << "," << row.max_sup_u << ","
                             << row.t_of_max << "\n";
            csv.commit();
            for (auto& row : rows)
                log << "m=" << row.m << " trial=" << row.trial << " -> " << to_string(row.status)
                    << " max_sup_u=" << row.max_sup_u << "\n";
        } else if (cfg.mode == RunConfig::Mode::ladder) {
            LadderConfig lc;
            lc.base = cfg.make_spec();
            lc.eps = cfg.ladder_eps;
            lc.data = make_initial(cfg.initial, cfg.grid);
            lc.scheme = cfg.scheme;
            lc.form = cfg.form;
            lc.diag = cfg.diag;
            const double t_cut = 0.8 * cfg.scheme.t_end;
            lc.phis.emplace_back(std::array<int, 3>{0, 0, 0}, t_cut, cfg.grid);
            lc.phis.emplace_back(std::array<int, 3>{1, 1, 1}, t_cut, cfg.grid);
            LadderReport rep = run_ladder(lc, opt.jobs);

            for (auto& rung : rep.rungs) {
                std::ostringstream dir;
                dir << "ladder/eps_" << short_num(rung.eps);
                fs::create_directories(outdir / dir.str());
                for (std::size_t s = 0; s < rung.trajectory.size(); ++s) {
                    std::ostringstream un, vn;
                    un << "u_" << std::setw(5) << std::setfill('0') << s << ".field";
                    vn << "v_" << std::setw(5) << std::setfill('0') << s << ".field";
                    write_chemofield((outdir / dir.str() / un.str()).string(),
                                     rung.trajectory[s].u, rung.trajectory[s].t);
                    write_chemofield((outdir / dir.str() / vn.str()).string(),
                                     rung.trajectory[s].v, rung.trajectory[s].t);
                }
            }

            detail::AtomicFile csv(outdir / "ladder.csv");
            auto& os = csv.stream();
            os << "eps,status,d_to_next,e_to_next";
            for (std::size_t i = 0; i < lc.phis.size(); ++i)
                os << ",R_u_phi" << i << ",R_v_phi" << i;
            os << "\n" << std::setprecision(17);
            std::size_t finest = rep.rungs.size();
            for (std::size_t i = rep.rungs.size(); i-- > 0;)
                if (rep.rungs[i].status == RunStatus::completed) { finest = i; break; }
            for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
                os << rep.rungs[i].eps << "," << to_string(rep.rungs[i].status) << ",";
                if (i < rep.d.size()) os << rep.d[i];
                os << ",";
                if (i < rep.e.size()) os << rep.e[i];
                for (std::size_t p = 0; p < lc.phis.size(); ++p) {
                    os << ",";
                    if (i == finest && p < rep.Ru.size()) os << rep.Ru[p];
                    os << ",";
                    if (i == finest && p < rep.Rv.size()) os << rep.Rv[p];
                }
                os << "\n";
            }
            os << "# cauchy_consistent = " << (rep.cauchy_consistent ? "yes" : "no") << "\n";
            csv.commit();
            log << "ladder: cauchy_consistent=" << (rep.cauchy_consistent ? "yes" : "no") << "\n";
        } else { // audit
            std::ifstream in(cfg.audit_input);
            if (!in) throw io_error("cannot open diagnostics CSV", cfg.audit_input);
            DiagSeries series = read_diag_csv(in, cfg.audit_input);
            DiagConfig dc = cfg.diag;
            dc.p_list = series.config.p_list;
            dc.pr_list = series.config.pr_list;
            AuditReport rep = detail::standard_audits(series, dc);
            detail::AtomicFile audit(outdir / "audit.txt");
            rep.print(audit.stream());
            audit.commit();
            rep.print(log);
            if (!rep.all_pass()) code = 1;
        }

        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        detail::AtomicFile manifest(outdir / "manifest");
        manifest.stream() << "config_hash = " << std::hex << detail::fnv1a(cfg.raw_text)
                          << std::dec << "\n"
                          << "seed = " << cfg.initial.seed << "\n"
                          << "build = " << CHEMOTAXSIM_VERSION << "\n"
                          << "wall_clock_s = " << secs << "\n";
        manifest.commit();
        return code;
    } catch (const io_error& e) {
        log << "I/O error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace chemotaxsim
