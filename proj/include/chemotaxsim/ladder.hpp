#pragma once

#include <array>
#include <cmath>
#include <future>
#include <string>
#include <vector>

#include "chemotaxsim/run.hpp"

namespace chemotaxsim {

// Analytic space-time test function phi(x,t) = psi(t) * prod_a P_a(x_a),
// P_a(x) = cos(k_a pi x / L_a) (zero normal derivative at the walls),
// psi(t) = cos^6((pi/2) q(t/t_cut)) with q the cubic smoothstep, vanishing
// with several derivatives at t_cut and flat at t = 0. Derivatives are exact.
class TestFunction {
public:
    TestFunction(std::array<int, 3> modes, double t_cut, const GridSpec& grid)
        : modes_(modes), t_cut_(t_cut), dim_(grid.dim), lengths_(grid.lengths) {
        if (!(t_cut > 0.0)) throw parameter_error("test function needs t_cut > 0");
        for (int a = 0; a < dim_; ++a)
            if (modes_[a] < 0) throw parameter_error("test function modes must be >= 0");
    }

    double t_cut() const { return t_cut_; }

    double psi(double t) const {
        if (t >= t_cut_) return 0.0;
        const double s = t / t_cut_;
        const double theta = 0.5 * M_PI * (3.0 * s * s - 2.0 * s * s * s);
        const double c = std::cos(theta);
        return c * c * c * c * c * c;
    }

    double psi_t(double t) const {
        if (t >= t_cut_) return 0.0;
        const double s = t / t_cut_;
        const double q = 3.0 * s * s - 2.0 * s * s * s;
        const double qp = (6.0 * s - 6.0 * s * s) / t_cut_;
        const double theta = 0.5 * M_PI * q;
        const double c = std::cos(theta);
        return -6.0 * c * c * c * c * c * std::sin(theta) * 0.5 * M_PI * qp;
    }

    double space(const std::array<double, 3>& x) const {
        double p = 1.0;
        for (int a = 0; a < dim_; ++a)
            p *= std::cos(modes_[a] * M_PI * x[a] / lengths_[a]);
        return p;
    }

    double space_grad(int axis, const std::array<double, 3>& x) const {
        double p = 1.0;
        for (int a = 0; a < dim_; ++a) {
            const double arg = modes_[a] * M_PI * x[a] / lengths_[a];
            if (a == axis)
                p *= -(modes_[a] * M_PI / lengths_[a]) * std::sin(arg);
            else
                p *= std::cos(arg);
        }
        return p;
    }

    double value(const std::array<double, 3>& x, double t) const { return psi(t) * space(x); }
    double time_deriv(const std::array<double, 3>& x, double t) const {
        return psi_t(t) * space(x);
    }
    double grad(int axis, const std::array<double, 3>& x, double t) const {
        return psi(t) * space_grad(axis, x);
    }

private:
    std::array<int, 3> modes_;
    double t_cut_;
    int dim_;
    std::array<double, 3> lengths_;
};

namespace detail {

inline std::vector<double> trapezoid_weights(const std::vector<TrajectorySample>& traj) {
    const std::size_t n = traj.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double half = 0.5 * (traj[i + 1].t - traj[i].t);
        w[i] += half;
        w[i + 1] += half;
    }
    return w;
}

// Sum over interior faces of (face value) * (exact grad phi at face center),
// scaled by cell volume. `face_of` yields the face value from the two cell
// values of the supplied fields.
template <typename FaceOf>
double face_pairing(const GridSpec& g, const TestFunction& phi, double t, FaceOf face_of) {
    double s = 0.0;
    const int n0 = g.cells[0], n1 = g.cells[1], n2 = g.cells[2];
    for (int a = 0; a < g.dim; ++a) {
        const std::array<int, 3> st{a == 0 ? 1 : 0, a == 1 ? 1 : 0, a == 2 ? 1 : 0};
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n1; ++j)
                for (int k = 0; k < n2; ++k) {
                    const int ia = (a == 0 ? i : (a == 1 ? j : k));
                    if (ia + 1 >= g.cells[a]) continue;
                    const std::size_t lo = g.index(i, j, k);
                    const std::size_t hi = g.index(i + st[0], j + st[1], k + st[2]);
                    std::array<double, 3> x{0.0, 0.0, 0.0};
                    const std::array<int, 3> idx{i, j, k};
                    for (int b = 0; b < g.dim; ++b)
                        x[b] = (b == a) ? (idx[b] + 1) * g.spacing[b] : g.center(b, idx[b]);
                    s += face_of(a, lo, hi) * phi.grad(a, x, t);
                }
    }
    return s * g.cell_volume();
}

template <typename CellOf>
double cell_pairing(const GridSpec& g, CellOf cell_of) {
    double s = 0.0;
    for (int i = 0; i < g.cells[0]; ++i)
        for (int j = 0; j < g.cells[1]; ++j)
            for (int k = 0; k < g.cells[2]; ++k) {
                std::array<double, 3> x{0.0, 0.0, 0.0};
                const std::array<int, 3> idx{i, j, k};
                for (int b = 0; b < g.dim; ++b) x[b] = g.center(b, idx[b]);
                s += cell_of(g.index(i, j, k), x);
            }
    return s * g.cell_volume();
}

} // namespace detail

// Residual of the weak u-equation tested against phi:
// -int int u phi_t - int u0 phi(.,0) + int int grad Dbar(u).grad phi
//   - int int (u/v) grad v . grad phi
inline double weak_residual_u(const std::vector<TrajectorySample>& traj, const InitialData& data,
                              const DiffusionSpec& spec, const TestFunction& phi) {
    if (traj.size() < 2) throw parameter_error("weak_residual_u needs >= 2 samples");
    if (phi.t_cut() > traj.back().t * (1.0 + 1e-12))
        throw parameter_error("test function time support exceeds trajectory window");
    const GridSpec& g = data.u0.grid;
    const auto wts = detail::trapezoid_weights(traj);
    double acc = 0.0;

    for (std::size_t s = 0; s < traj.size(); ++s) {
        const auto& smp = traj[s];
        const double wt = wts[s];
        // -u phi_t
        acc -= wt * detail::cell_pairing(g, [&](std::size_t c, const std::array<double, 3>& x) {
            return smp.u[c] * phi.time_deriv(x, smp.t);
        });
        // + grad Dbar(u) . grad phi (face gradient of the cellwise Dbar field)
        ScalarField dbar(g);
        for (std::size_t c = 0; c < dbar.size(); ++c)
            dbar[c] = spec.antiderivative(std::max(smp.u[c], 0.0));
        acc += wt * detail::face_pairing(g, phi, smp.t, [&](int a, std::size_t lo, std::size_t hi) {
            return (dbar[hi] - dbar[lo]) / g.spacing[a];
        });
        // - (u/v) grad v . grad phi (face-averaged u, v)
        acc -= wt * detail::face_pairing(g, phi, smp.t, [&](int a, std::size_t lo, std::size_t hi) {
            const double uf = 0.5 * (smp.u[lo] + smp.u[hi]);
            const double vf = 0.5 * (smp.v[lo] + smp.v[hi]);
            return uf / vf * (smp.v[hi] - smp.v[lo]) / g.spacing[a];
        });
    }
    acc -= detail::cell_pairing(g, [&](std::size_t c, const std::array<double, 3>& x) {
        return data.u0[c] * phi.value(x, 0.0);
    });
    return std::abs(acc);
}

// Residual of the weak v-equation in the phi_t form symmetric with the
// u-equation:
// -int int v phi_t - int v0 phi(.,0) + int int grad v . grad phi + int int u v phi
inline double weak_residual_v(const std::vector<TrajectorySample>& traj, const InitialData& data,
                              const TestFunction& phi) {
    if (traj.size() < 2) throw parameter_error("weak_residual_v needs >= 2 samples");
    if (phi.t_cut() > traj.back().t * (1.0 + 1e-12))
        throw parameter_error("test function time support exceeds trajectory window");
    const GridSpec& g = data.v0.grid;
    const auto wts = detail::trapezoid_weights(traj);
    double acc = 0.0;
    for (std::size_t s = 0; s < traj.size(); ++s) {
        const auto& smp = traj[s];
        const double wt = wts[s];
        acc -= wt * detail::cell_pairing(g, [&](std::size_t c, const std::array<double, 3>& x) {
            return smp.v[c] * phi.time_deriv(x, smp.t);
        });
        acc += wt * detail::face_pairing(g, phi, smp.t, [&](int a, std::size_t lo, std::size_t hi) {
            return (smp.v[hi] - smp.v[lo]) / g.spacing[a];
        });
        acc += wt * detail::cell_pairing(g, [&](std::size_t c, const std::array<double, 3>& x) {
            return smp.u[c] * smp.v[c] * phi.value(x, smp.t);
        });
    }
    acc -= detail::cell_pairing(g, [&](std::size_t c, const std::array<double, 3>& x) {
        return data.v0[c] * phi.value(x, 0.0);
    });
    return std::abs(acc);
}

struct LadderConfig {
    DiffusionSpec base = DiffusionSpec::power(1.0, 2.0);
    std::vector<double> eps;
    InitialData data;
    SchemeConfig scheme;
    Formulation form = Formulation::uv;
    std::vector<TestFunction> phis;
    DiagConfig diag;
};

struct LadderRung {
    double eps = 0.0;
    RunStatus status = RunStatus::completed;
    std::string reason;
    std::vector<TrajectorySample> trajectory;
};

struct LadderReport {
    std::vector<LadderRung> rungs;
    std::vector<double> d; // L1(space-time) difference between consecutive rungs
    std::vector<double> e; // sup over samples of max |v difference|
    std::vector<double> Ru, Rv; // finest-rung weak residuals, one per phi
    bool cauchy_consistent = false;
};

inline LadderReport run_ladder(const LadderConfig& cfg, int jobs = 1) {
    if (cfg.eps.empty()) throw parameter_error("ladder needs a nonempty eps list");
    for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
        if (!(cfg.eps[i] > 0.0)) throw parameter_error("ladder eps values must be > 0");
        if (i > 0 && !(cfg.eps[i] < cfg.eps[i - 1]))
            throw parameter_error("ladder eps values must be strictly decreasing");
    }
    LadderReport rep;
    rep.rungs.resize(cfg.eps.size());

    auto run_rung = [&](std::size_t i) {
        LadderRung r;
        r.eps = cfg.eps[i];
        RunResult rr = run(cfg.data, cfg.base.shifted(cfg.eps[i]), cfg.scheme, cfg.form,
                           cfg.diag, true);
        r.status = rr.status;
        r.reason = rr.reason;
        r.trajectory = std::move(rr.trajectory);
        return r;
    };

    if (jobs > 1) {
        std::vector<std::future<LadderRung>> futs;
        for (std::size_t i = 0; i < cfg.eps.size(); ++i)
            futs.push_back(std::async(std::launch::async, run_rung, i));
        for (std::size_t i = 0; i < cfg.eps.size(); ++i) rep.rungs[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < cfg.eps.size(); ++i) rep.rungs[i] = run_rung(i);
    }

    const double vol = cfg.data.u0.grid.cell_volume();
    auto st_l1 = [&](const std::vector<TrajectorySample>& a,
                     const std::vector<TrajectorySample>& b) {
        const std::size_t n = std::min(a.size(), b.size());
        double acc = 0.0;
        for (std::size_t s = 0; s + 1 < n; ++s) {
            const double dt = a[s + 1].t - a[s].t;
            double l1a = 0.0, l1b = 0.0;
            for (std::size_t c = 0; c < a[s].u.size(); ++c) {
                l1a += std::abs(a[s].u[c] - b[s].u[c]);
                l1b += std::abs(a[s + 1].u[c] - b[s + 1].u[c]);
            }
            acc += 0.5 * dt * (l1a + l1b) * vol;
        }
        return acc;
    };
    auto sup_dv = [&](const std::vector<TrajectorySample>& a,
                      const std::vector<TrajectorySample>& b) {
        const std::size_t n = std::min(a.size(), b.size());
        double m = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t c = 0; c < a[s].v.size(); ++c)
                m = std::max(m, std::abs(a[s].v[c] - b[s].v[c]));
        return m;
    };

    for (std::size_t i = 0; i + 1 < rep.rungs.size(); ++i) {
        if (rep.rungs[i].status == RunStatus::completed &&
            rep.rungs[i + 1].status == RunStatus::completed) {
            rep.d.push_back(st_l1(rep.rungs[i].trajectory, rep.rungs[i + 1].trajectory));
            rep.e.push_back(sup_dv(rep.rungs[i].trajectory, rep.rungs[i + 1].trajectory));
        } else {
            rep.d.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.e.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }

    rep.cauchy_consistent = !rep.d.empty();
    for (std::size_t i = 0; i + 1 < rep.d.size(); ++i) {
        if (std::isnan(rep.d[i]) || std::isnan(rep.d[i + 1]) ||
            rep.d[i + 1] > 1.1 * rep.d[i] || rep.e[i + 1] > 1.1 * rep.e[i])
            rep.cauchy_consistent = false;
    }

    // weak residuals of the finest completed rung
    for (auto it = rep.rungs.rbegin(); it != rep.rungs.rend(); ++it) {
        if (it->status != RunStatus::completed) continue;
        const DiffusionSpec fine = cfg.base.shifted(it->eps);
        for (const auto& phi : cfg.phis) {
            rep.Ru.push_back(weak_residual_u(it->trajectory, cfg.data, fine, phi));
            rep.Rv.push_back(weak_residual_v(it->trajectory, cfg.data, phi));
        }
        break;
    }
    return rep;
}

} // namespace chemotaxsim
