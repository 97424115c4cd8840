#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "chemotaxsim/errors.hpp"
#include "chemotaxsim/grid.hpp"

namespace chemotaxsim {

// w = -log(v / v0_max), the transformation removing the singular 1/v factor.
inline ScalarField v_to_w(const ScalarField& v, double v0_max) {
    if (!(v0_max > 0.0)) throw parameter_error("v_to_w requires v0_max > 0");
    ScalarField w(v.grid);
    for (std::size_t c = 0; c < v.size(); ++c) {
        if (!(v[c] > 0.0))
            throw positivity_error("v_to_w: non-positive v value", c);
        w[c] = -std::log(v[c] / v0_max);
    }
    return w;
}

inline ScalarField w_to_v(const ScalarField& w, double v0_max) {
    if (!(v0_max > 0.0)) throw parameter_error("w_to_v requires v0_max > 0");
    ScalarField v(w.grid);
    for (std::size_t c = 0; c < w.size(); ++c) {
        if (w[c] < -1e-12)
            throw positivity_error("w_to_v: negative w value", c);
        v[c] = v0_max * std::exp(-w[c]);
    }
    return v;
}

struct InitialData {
    ScalarField u0;
    ScalarField v0;
    double v0_max = 0.0;

    static InitialData make(ScalarField u, ScalarField v) {
        InitialData d;
        ensure_finite(u, "u0");
        ensure_finite(v, "v0");
        double vmax = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c)
            if (u[c] < 0.0)
                throw positivity_error("u0 must be nonnegative", c);
        for (std::size_t c = 0; c < v.size(); ++c) {
            if (!(v[c] > 0.0))
                throw positivity_error("v0 must be positive", c);
            vmax = std::max(vmax, v[c]);
        }
        d.u0 = std::move(u);
        d.v0 = std::move(v);
        d.v0_max = vmax;
        return d;
    }
};

struct InitialPreset {
    enum class Kind { constant, gaussian_bump, perturbed_constant, seeded_random };
    Kind kind = Kind::constant;

    // constant / perturbed_constant
    double u_value = 1.0;
    double v_value = 1.0;

    // gaussian_bump: u0 = background + amplitude * exp(-|x-center|^2/(2 width^2)),
    // v0 = v_value - v_dip * exp(-|x-center|^2/(2 width^2))
    double amplitude = 1.0;
    double width = 0.1;
    double background = 0.0;
    double v_dip = 0.0;
    std::array<double, 3> center{0.5, 0.5, 0.5};

    // perturbed_constant: one cosine mode product, relative amplitude < 1
    double perturb_amp = 0.0;
    std::array<int, 3> modes{1, 1, 1};

    // seeded_random: per-cell uniform values; generator is mt19937_64 seeded
    // with `seed`, u then v drawn cell by cell in row-major order through
    // uniform_real_distribution<double>
    double u_min = 0.0, u_max = 1.0;
    double v_min = 0.5, v_max = 1.0;
    std::uint64_t seed = 0;
};

inline InitialData make_initial(const InitialPreset& p, const GridSpec& g) {
    ScalarField u(g), v(g);
    switch (p.kind) {
    case InitialPreset::Kind::constant: {
        if (p.u_value < 0.0) throw parameter_error("constant preset: u must be >= 0");
        if (!(p.v_value > 0.0)) throw parameter_error("constant preset: v must be > 0");
        for (std::size_t c = 0; c < u.size(); ++c) { u[c] = p.u_value; v[c] = p.v_value; }
        break;
    }
    case InitialPreset::Kind::gaussian_bump: {
        if (p.background < 0.0 || p.amplitude < 0.0)
            throw parameter_error("gaussian_bump preset: u parameters must be >= 0");
        if (!(p.width > 0.0)) throw parameter_error("gaussian_bump preset: width must be > 0");
        if (!(p.v_value - std::max(p.v_dip, 0.0) > 0.0) || p.v_dip < 0.0 || p.v_dip > p.v_value)
            throw parameter_error("gaussian_bump preset: v must stay positive");
        const double inv2w2 = 1.0 / (2.0 * p.width * p.width);
        for (int i = 0; i < g.cells[0]; ++i)
            for (int j = 0; j < g.cells[1]; ++j)
                for (int k = 0; k < g.cells[2]; ++k) {
                    double r2 = 0.0;
                    const std::array<int, 3> idx{i, j, k};
                    for (int a = 0; a < g.dim; ++a) {
                        const double d = g.center(a, idx[a]) - p.center[a];
                        r2 += d * d;
                    }
                    const double bump = std::exp(-r2 * inv2w2);
                    const std::size_t c = g.index(i, j, k);
                    u[c] = p.background + p.amplitude * bump;
                    v[c] = p.v_value - p.v_dip * bump;
                }
        break;
    }
    case InitialPreset::Kind::perturbed_constant: {
        if (!(std::abs(p.perturb_amp) < 1.0))
            throw parameter_error("perturbed_constant preset: |a| must be < 1");
        if (p.u_value < 0.0 || !(p.v_value > 0.0))
            throw parameter_error("perturbed_constant preset: invalid base values");
        for (int i = 0; i < g.cells[0]; ++i)
            for (int j = 0; j < g.cells[1]; ++j)
                for (int k = 0; k < g.cells[2]; ++k) {
                    double mode = 1.0;
                    const std::array<int, 3> idx{i, j, k};
                    for (int a = 0; a < g.dim; ++a)
                        mode *= std::cos(p.modes[a] * M_PI * g.center(a, idx[a]) / g.lengths[a]);
                    const std::size_t c = g.index(i, j, k);
                    u[c] = p.u_value * (1.0 + p.perturb_amp * mode);
                    v[c] = p.v_value * (1.0 + p.perturb_amp * mode);
                }
        break;
    }
    case InitialPreset::Kind::seeded_random: {
        if (p.u_min < 0.0 || p.u_max < p.u_min)
            throw parameter_error("seeded_random preset: need 0 <= u_min <= u_max");
        if (!(p.v_min > 0.0) || p.v_max < p.v_min)
            throw parameter_error("seeded_random preset: need 0 < v_min <= v_max");
        std::mt19937_64 rng(p.seed);
        std::uniform_real_distribution<double> du(p.u_min, p.u_max), dv(p.v_min, p.v_max);
        for (std::size_t c = 0; c < u.size(); ++c) u[c] = du(rng);
        for (std::size_t c = 0; c < v.size(); ++c) v[c] = dv(rng);
        break;
    }
    }
    return InitialData::make(std::move(u), std::move(v));
}

} // namespace chemotaxsim
