#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chemotaxsim/diagnostics.hpp"
#include "chemotaxsim/stepper.hpp"

namespace chemotaxsim {

enum class Formulation { uv, uw };
enum class RunStatus { completed, blowup_suspected, aborted };

inline const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blowup_suspected: return "blow-up suspected";
    case RunStatus::aborted: return "aborted";
    }
    return "?";
}

struct TrajectorySample {
    double t = 0.0;
    ScalarField u;
    ScalarField v;
};

struct RunResult {
    RunStatus status = RunStatus::completed;
    std::string reason;
    std::vector<DiagRecord> series;
    std::vector<TrajectorySample> trajectory; // filled only when requested
    SimState final_state;
    long total_steps = 0;
};

// Advance from t=0 to t_end with dt = stable_dt clipped to land exactly on
// sample times. Emits one DiagRecord per sample (including t=0); cumulative
// functionals are accumulated every step.
inline RunResult run(const InitialData& data, const DiffusionSpec& spec,
                     const SchemeConfig& cfg, Formulation form,
                     const DiagConfig& dc = {}, bool keep_trajectory = false,
                     const std::function<void(const TrajectorySample&)>& on_sample = {}) {
    cfg.validate();
    RunResult res;
    const double v0max = data.v0_max;
    const double overflow_cap =
        cfg.overflow_factor * std::max(lp_norm(data.u0, std::numeric_limits<double>::infinity()), 1.0);

    SimState uv;
    UwState uw;
    if (form == Formulation::uv) {
        uv.u = data.u0; uv.v = data.v0;
    } else {
        uw.u = data.u0; uw.w = v_to_w(data.v0, v0max);
    }

    auto current_u = [&]() -> const ScalarField& { return form == Formulation::uv ? uv.u : uw.u; };
    auto current_v = [&]() -> ScalarField {
        return form == Formulation::uv ? uv.v : w_to_v(uw.w, v0max);
    };
    auto current_t = [&]() { return form == Formulation::uv ? uv.t : uw.t; };

    Cumulatives cum;
    cum.lp_pow_r.resize(dc.pr_list.size(), 0.0);
    ScalarField v_now = current_v();
    CumRates rate_prev = diag_rates(current_u(), v_now, v0max, spec, dc);

    auto emit = [&](double t) {
        res.series.push_back(compute_record(t, current_u(), v_now, v0max, spec, dc, cum));
        if (keep_trajectory || on_sample) {
            TrajectorySample s{t, current_u(), v_now};
            if (on_sample) on_sample(s);
            if (keep_trajectory) res.trajectory.push_back(std::move(s));
        }
    };
    emit(0.0);

    long k_sample = 1;
    try {
        while (current_t() < cfg.t_end * (1.0 - 1e-14)) {
            const double next_sample = std::min(cfg.t_end, k_sample * cfg.sample_every);
            double dt = form == Formulation::uv ? stable_dt(uv, spec, cfg)
                                                : stable_dt(uw, spec, cfg);
            const double remain = next_sample - current_t();
            bool landing = false;
            if (dt >= remain * (1.0 - 1e-12)) { dt = remain; landing = true; }
            if (form == Formulation::uv) uv = step_uv(uv, spec, cfg, dt);
            else uw = step_uw(uw, spec, cfg, dt);
            ++res.total_steps;

            v_now = current_v();
            CumRates rate_now = diag_rates(current_u(), v_now, v0max, spec, dc);
            cum.advance(rate_prev, rate_now, dt);
            rate_prev = std::move(rate_now);

            const double sup_u = lp_norm(current_u(), std::numeric_limits<double>::infinity());
            if (sup_u > overflow_cap) {
                emit(current_t());
                res.status = RunStatus::blowup_suspected;
                res.reason = "sup u exceeded overflow cap";
                break;
            }
            if (landing) {
                emit(next_sample);
                ++k_sample;
            }
        }
    } catch (const positivity_error& e) {
        res.status = RunStatus::aborted;
        res.reason = std::string("positivity violation: ") + e.what();
    } catch (const solver_error& e) {
        res.status = RunStatus::aborted;
        res.reason = std::string("solver failure: ") + e.what();
    }

    if (form == Formulation::uv) {
        res.final_state = uv;
    } else {
        res.final_state.t = uw.t;
        res.final_state.u = uw.u;
        res.final_state.v = w_to_v(uw.w, v0max);
        res.final_state.step_index = uw.step_index;
    }
    return res;
}

} // namespace chemotaxsim
