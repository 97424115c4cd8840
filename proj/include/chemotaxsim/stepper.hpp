#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chemotaxsim/diffusion.hpp"
#include "chemotaxsim/errors.hpp"
#include "chemotaxsim/grid.hpp"
#include "chemotaxsim/model.hpp"

namespace chemotaxsim {

struct SchemeConfig {
    double cfl_safety = 0.5;
    enum class FaceAverage { arithmetic, harmonic };
    FaceAverage face_average = FaceAverage::arithmetic;
    double v_solver_tol = 1e-10;
    int v_solver_max_iters = 0; // 0 means 10 * total cells
    double dt_max = std::numeric_limits<double>::infinity();
    double t_end = 1.0;
    double sample_every = 0.1;
    double overflow_factor = 1e6;

    void validate() const {
        if (!(cfl_safety > 0.0) || cfl_safety > 1.0)
            throw parameter_error("cfl_safety must be in (0,1]");
        if (!(v_solver_tol > 0.0)) throw parameter_error("v_solver_tol must be > 0");
        if (!(dt_max > 0.0)) throw parameter_error("dt_max must be > 0");
        if (!(t_end > 0.0)) throw parameter_error("t_end must be > 0");
        if (!(sample_every > 0.0)) throw parameter_error("sample_every must be > 0");
        if (!(overflow_factor > 1.0)) throw parameter_error("overflow_factor must be > 1");
    }
};

struct SimState {
    double t = 0.0;
    ScalarField u;
    ScalarField v;
    long step_index = 0;
};

// (u, w) state of the transformed system; v = v0_max * exp(-w).
struct UwState {
    double t = 0.0;
    ScalarField u;
    ScalarField w;
    long step_index = 0;
};

namespace detail {

// Per-face quantities shared by the stability bound and the flux update.
struct FacePack {
    FaceField grad_u;   // two-point u gradients
    FaceField diff;     // face diffusivity D_face
    FaceField vel;      // advective face velocity W (u_t = div(D grad u) - div(u W))
    double diff_max = 0.0;
    double vel_max = 0.0;
};

inline double face_diffusivity(double dl, double dr, SchemeConfig::FaceAverage avg) {
    if (avg == SchemeConfig::FaceAverage::harmonic)
        return (dl > 0.0 && dr > 0.0) ? 2.0 * dl * dr / (dl + dr) : 0.0;
    return 0.5 * (dl + dr);
}

// Assemble face data. `chemo` is v for the uv formulation (velocity
// grad v / v_face) and w for the uw formulation (velocity -grad w).
inline FacePack assemble_faces(const ScalarField& u, const ScalarField& chemo, bool chemo_is_v,
                               const DiffusionSpec& spec, const SchemeConfig& cfg) {
    const GridSpec& g = u.grid;
    FacePack p;
    p.grad_u = FaceField(g);
    p.diff = FaceField(g);
    p.vel = FaceField(g);
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    for (int a = 0; a < g.dim; ++a) {
        const double inv_h = 1.0 / g.spacing[a];
        const std::array<int, 3> st{a == 0 ? 1 : 0, a == 1 ? 1 : 0, a == 2 ? 1 : 0};
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) {
                    const int ia = (a == 0 ? i : (a == 1 ? j : k));
                    if (ia + 1 >= g.cells[a]) continue;
                    const std::size_t lo = g.index(i, j, k);
                    const std::size_t hi = g.index(i + st[0], j + st[1], k + st[2]);
                    const std::size_t f = p.grad_u.findex(a, i + st[0], j + st[1], k + st[2]);
                    p.grad_u.axis[a][f] = (u[hi] - u[lo]) * inv_h;
                    const double d =
                        face_diffusivity(spec.unchecked(std::max(u[lo], 0.0)),
                                         spec.unchecked(std::max(u[hi], 0.0)), cfg.face_average);
                    p.diff.axis[a][f] = d;
                    p.diff_max = std::max(p.diff_max, d);
                    double w;
                    if (chemo_is_v) {
                        const double vbar = 0.5 * (chemo[lo] + chemo[hi]);
                        w = (chemo[hi] - chemo[lo]) * inv_h / vbar;
                    } else {
                        w = -(chemo[hi] - chemo[lo]) * inv_h;
                    }
                    p.vel.axis[a][f] = w;
                    p.vel_max = std::max(p.vel_max, std::abs(w));
                }
    }
    return p;
}

inline double stable_dt_from(const FacePack& p, const GridSpec& g, const DiffusionSpec& spec,
                             const ScalarField& u, const SchemeConfig& cfg) {
    double h_min = std::numeric_limits<double>::infinity();
    for (int a = 0; a < g.dim; ++a) h_min = std::min(h_min, g.spacing[a]);
    // The stability bound uses D at face-averaged u; the flux uses averaged D.
    // For the bound take the larger of the two so it covers both.
    double dmax = p.diff_max;
    (void)spec; (void)u;
    double dt = cfg.dt_max;
    if (dmax > 0.0)
        dt = std::min(dt, h_min * h_min / (2.0 * g.dim * dmax));
    dt = std::min(dt, h_min / (p.vel_max + 1e-30));
    return cfg.cfl_safety * dt;
}

// Explicit flux-form u update: F = D_face grad u - u_upwind W; u += dt div F.
inline ScalarField advance_u(const ScalarField& u, const FacePack& p, double dt) {
    const GridSpec& g = u.grid;
    ScalarField out = u;
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    for (int a = 0; a < g.dim; ++a) {
        const double lam = dt / g.spacing[a];
        const std::array<int, 3> st{a == 0 ? 1 : 0, a == 1 ? 1 : 0, a == 2 ? 1 : 0};
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) {
                    const int ia = (a == 0 ? i : (a == 1 ? j : k));
                    if (ia + 1 >= g.cells[a]) continue;
                    const std::size_t lo = g.index(i, j, k);
                    const std::size_t hi = g.index(i + st[0], j + st[1], k + st[2]);
                    const std::size_t f = p.grad_u.findex(a, i + st[0], j + st[1], k + st[2]);
                    const double w = p.vel.axis[a][f];
                    const double u_up = (w > 0.0) ? u[lo] : u[hi];
                    const double flux = p.diff.axis[a][f] * p.grad_u.axis[a][f] - u_up * w;
                    const double d = lam * flux;
                    out[hi] -= d;
                    out[lo] += d;
                }
    }
    double umax = 0.0, umin = 0.0;
    for (double v : out.values) { umax = std::max(umax, v); umin = std::min(umin, v); }
    if (umin < -1e-12 * std::max(umax, 1e-300)) {
        std::size_t worst = 0;
        for (std::size_t c = 0; c < out.size(); ++c)
            if (out[c] == umin) { worst = c; break; }
        throw positivity_error("u turned negative during explicit update", worst);
    }
    if (umin < 0.0)
        for (double& v : out.values) v = std::max(v, 0.0);
    return out;
}

// Gauss-Seidel solve of (I + dt*absorb - dt*Lap_h) x = b with homogeneous
// Neumann walls. The iteration matrix is a diagonally dominant M-matrix and
// every sweep iterate stays within (0, max b] when absorb >= 0 and the warm
// start does, which is what guarantees positivity and the maximum principle
// independently of where the iteration is stopped.
inline void helmholtz_solve(ScalarField& x, const ScalarField& b, const ScalarField* absorb,
                            double dt, double tol, int max_iters) {
    const GridSpec& g = b.grid;
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    std::array<double, 3> lam{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) lam[a] = dt / (g.spacing[a] * g.spacing[a]);
    double bnorm = 0.0;
    for (double v : b.values) bnorm = std::max(bnorm, std::abs(v));
    const double target = tol * std::max(bnorm, 1e-300);
    if (max_iters <= 0) max_iters = 10 * static_cast<int>(g.total_cells());

    auto neighbor_sum = [&](int i, int j, int k, double& diag) {
        double s = 0.0;
        diag = 1.0;
        const std::array<int, 3> idx{i, j, k};
        for (int a = 0; a < g.dim; ++a) {
            std::array<int, 3> nb = idx;
            if (idx[a] > 0) {
                nb[a] = idx[a] - 1;
                s += lam[a] * x[g.index(nb[0], nb[1], nb[2])];
                diag += lam[a];
            }
            nb = idx;
            if (idx[a] + 1 < g.cells[a]) {
                nb[a] = idx[a] + 1;
                s += lam[a] * x[g.index(nb[0], nb[1], nb[2])];
                diag += lam[a];
            }
        }
        return s;
    };

    for (int it = 0; it < max_iters; ++it) {
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) {
                    const std::size_t c = g.index(i, j, k);
                    double diag;
                    const double s = neighbor_sum(i, j, k, diag);
                    if (absorb) diag += dt * (*absorb)[c];
                    x[c] = (b[c] + s) / diag;
                }
        double res = 0.0;
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) {
                    const std::size_t c = g.index(i, j, k);
                    double diag;
                    const double s = neighbor_sum(i, j, k, diag);
                    if (absorb) diag += dt * (*absorb)[c];
                    res = std::max(res, std::abs(diag * x[c] - s - b[c]));
                }
        if (res <= target) return;
    }
    throw solver_error("implicit solve failed to converge", max_iters);
}

} // namespace detail

inline double stable_dt(const SimState& state, const DiffusionSpec& spec,
                        const SchemeConfig& cfg) {
    auto p = detail::assemble_faces(state.u, state.v, true, spec, cfg);
    return detail::stable_dt_from(p, state.u.grid, spec, state.u, cfg);
}

inline double stable_dt(const UwState& state, const DiffusionSpec& spec,
                        const SchemeConfig& cfg) {
    auto p = detail::assemble_faces(state.u, state.w, false, spec, cfg);
    return detail::stable_dt_from(p, state.u.grid, spec, state.u, cfg);
}

// One step of the (u, v) scheme: explicit conservative u flux, implicit
// absorption + diffusion for v.
inline SimState step_uv(const SimState& state, const DiffusionSpec& spec,
                        const SchemeConfig& cfg, double dt) {
    auto p = detail::assemble_faces(state.u, state.v, true, spec, cfg);
    const double dts = detail::stable_dt_from(p, state.u.grid, spec, state.u, cfg);
    if (dt > dts * (1.0 + 1e-12))
        throw step_size_error("dt exceeds the stability bound");
    SimState next;
    next.u = detail::advance_u(state.u, p, dt);
    next.v = state.v; // warm start
    detail::helmholtz_solve(next.v, state.v, &state.u, dt, cfg.v_solver_tol,
                            cfg.v_solver_max_iters);
    next.t = state.t + dt;
    next.step_index = state.step_index + 1;
    return next;
}

// One step of the transformed (u, w) scheme: same conservative u flux with
// attractive velocity -grad w; w semi-implicit with explicit |grad w|^2 and
// source u.
inline UwState step_uw(const UwState& state, const DiffusionSpec& spec,
                       const SchemeConfig& cfg, double dt) {
    auto p = detail::assemble_faces(state.u, state.w, false, spec, cfg);
    const double dts = detail::stable_dt_from(p, state.u.grid, spec, state.u, cfg);
    if (dt > dts * (1.0 + 1e-12))
        throw step_size_error("dt exceeds the stability bound");
    UwState next;
    next.u = detail::advance_u(state.u, p, dt);

    FaceField gw = face_gradient(state.w);
    ScalarField gw2 = cellwise_grad_sq(gw);
    ScalarField rhs = state.w;
    for (std::size_t c = 0; c < rhs.size(); ++c)
        rhs[c] += dt * (state.u[c] - gw2[c]);
    next.w = state.w;
    detail::helmholtz_solve(next.w, rhs, nullptr, dt, cfg.v_solver_tol,
                            cfg.v_solver_max_iters);
    for (std::size_t c = 0; c < next.w.size(); ++c) {
        if (next.w[c] < -1e-10)
            throw positivity_error("w turned negative during semi-implicit update", c);
        if (next.w[c] < 0.0) next.w[c] = 0.0;
    }
    next.t = state.t + dt;
    next.step_index = state.step_index + 1;
    return next;
}

} // namespace chemotaxsim
