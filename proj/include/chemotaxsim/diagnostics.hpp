#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chemotaxsim/diffusion.hpp"
#include "chemotaxsim/errors.hpp"
#include "chemotaxsim/grid.hpp"
#include "chemotaxsim/model.hpp"

namespace chemotaxsim {

struct DiagConfig {
    std::vector<double> p_list;                      // extra ||u||_p columns
    std::vector<std::pair<double, double>> pr_list;  // cumulative int ||u||_p^r columns
    double energy_slack = 0.05;
    double w_cap = 1e3;
};

// One time-stamped row of every tracked functional.
struct DiagRecord {
    double t = 0.0;
    double mass_u = 0.0;
    double sup_u = 0.0;
    double min_v = 0.0;
    double max_v = 0.0;
    double sup_w = 0.0;
    double int_w = 0.0;
    double cum_grad_w_sq = 0.0;
    double int_u_pow_m1 = 0.0;
    double du_grad_u_l2_cum = 0.0;
    double grad_um1_l2_cum = 0.0;
    double mixed_cum = 0.0;
    double grad_v_sup = 0.0;
    double grad_logv_sup = 0.0;
    std::vector<double> lp;
    std::vector<double> cum_lp_r;
};

// Instantaneous rates of the cumulative functionals.
struct CumRates {
    double grad_w_sq = 0.0;
    double du_grad_u = 0.0;
    double grad_um1 = 0.0;
    double mixed = 0.0;
    std::vector<double> lp_pow_r;
};

// Running space-time integrals, advanced per step by the trapezoid rule so
// the result does not depend on the sampling cadence.
struct Cumulatives {
    double grad_w_sq = 0.0;
    double du_grad_u = 0.0;
    double grad_um1 = 0.0;
    double mixed = 0.0;
    std::vector<double> lp_pow_r;

    void advance(const CumRates& a, const CumRates& b, double dt) {
        grad_w_sq += 0.5 * dt * (a.grad_w_sq + b.grad_w_sq);
        du_grad_u += 0.5 * dt * (a.du_grad_u + b.du_grad_u);
        grad_um1 += 0.5 * dt * (a.grad_um1 + b.grad_um1);
        mixed += 0.5 * dt * (a.mixed + b.mixed);
        if (lp_pow_r.size() < a.lp_pow_r.size()) lp_pow_r.resize(a.lp_pow_r.size(), 0.0);
        for (std::size_t i = 0; i < a.lp_pow_r.size(); ++i)
            lp_pow_r[i] += 0.5 * dt * (a.lp_pow_r[i] + b.lp_pow_r[i]);
    }
};

inline CumRates diag_rates(const ScalarField& u, const ScalarField& v, double v0_max,
                           const DiffusionSpec& spec, const DiagConfig& dc) {
    const GridSpec& g = u.grid;
    const double vol = g.cell_volume();
    CumRates r;

    ScalarField w = v_to_w(v, v0_max);
    r.grad_w_sq = grad_l2_sq(w);

    FaceField gu = face_gradient(u);
    // |D(u) grad u|^2 with face diffusivity by arithmetic average
    {
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
                        const double d = 0.5 * (spec.unchecked(u[lo]) + spec.unchecked(u[hi]));
                        const double f = d * gu.axis[a][gu.findex(a, i + st[0], j + st[1], k + st[2])];
                        s += f * f;
                    }
        }
        r.du_grad_u = s * vol;
    }

    // |grad u^{m-1}|^2
    {
        const double e = spec.m() - 1.0;
        ScalarField um1(g);
        for (std::size_t c = 0; c < u.size(); ++c) um1[c] = fast_pow(u[c], e);
        r.grad_um1 = grad_l2_sq(um1);
    }

    // D(u) u^{m-3} |grad u|^2; cells with u = 0 and m < 3 contribute 0
    {
        ScalarField gu2 = cellwise_grad_sq(gu);
        const double e = spec.m() - 3.0;
        double s = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) {
            if (u[c] == 0.0 && e < 0.0) continue;
            s += spec.unchecked(u[c]) * fast_pow(u[c], e) * gu2[c];
        }
        r.mixed = s * vol;
    }

    r.lp_pow_r.resize(dc.pr_list.size());
    for (std::size_t i = 0; i < dc.pr_list.size(); ++i)
        r.lp_pow_r[i] = std::pow(lp_norm(u, dc.pr_list[i].first), dc.pr_list[i].second);
    return r;
}

inline DiagRecord compute_record(double t, const ScalarField& u, const ScalarField& v,
                                 double v0_max, const DiffusionSpec& spec,
                                 const DiagConfig& dc, const Cumulatives& cum) {
    DiagRecord rec;
    rec.t = t;
    rec.mass_u = integrate(u);
    rec.sup_u = lp_norm(u, std::numeric_limits<double>::infinity());
    rec.min_v = *std::min_element(v.values.begin(), v.values.end());
    rec.max_v = *std::max_element(v.values.begin(), v.values.end());
    ScalarField w = v_to_w(v, v0_max);
    rec.sup_w = lp_norm(w, std::numeric_limits<double>::infinity());
    rec.int_w = integrate(w);
    rec.cum_grad_w_sq = cum.grad_w_sq;
    {
        const double e = spec.m() - 1.0;
        double s = 0.0;
        for (double val : u.values) s += fast_pow(val, e);
        rec.int_u_pow_m1 = s * u.grid.cell_volume();
    }
    rec.du_grad_u_l2_cum = cum.du_grad_u;
    rec.grad_um1_l2_cum = cum.grad_um1;
    rec.mixed_cum = cum.mixed;

    FaceField gv = face_gradient(v);
    const GridSpec& g = v.grid;
    double gmax = 0.0, glmax = 0.0;
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
                    const double grad = gv.axis[a][gv.findex(a, i + st[0], j + st[1], k + st[2])];
                    gmax = std::max(gmax, std::abs(grad));
                    glmax = std::max(glmax, std::abs(grad) / (0.5 * (v[lo] + v[hi])));
                }
    }
    rec.grad_v_sup = gmax;
    rec.grad_logv_sup = glmax;

    rec.lp.resize(dc.p_list.size());
    for (std::size_t i = 0; i < dc.p_list.size(); ++i)
        rec.lp[i] = lp_norm(u, dc.p_list[i]);
    rec.cum_lp_r = cum.lp_pow_r;
    rec.cum_lp_r.resize(dc.pr_list.size(), 0.0);

    for (double x : {rec.mass_u, rec.sup_u, rec.min_v, rec.max_v, rec.sup_w, rec.int_w,
                     rec.cum_grad_w_sq, rec.int_u_pow_m1, rec.du_grad_u_l2_cum,
                     rec.grad_um1_l2_cum, rec.mixed_cum, rec.grad_v_sup, rec.grad_logv_sup})
        if (!std::isfinite(x))
            throw data_integrity_error("non-finite diagnostic functional");
    return rec;
}

// ---- CSV -------------------------------------------------------------------

inline std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

inline void write_diag_header(std::ostream& os, const DiagConfig& dc) {
    os << "t,mass_u,sup_u,min_v,max_v,sup_w,int_w,cum_grad_w_sq,int_u_pow_m1,"
          "du_grad_u_l2_cum,grad_um1_l2_cum,mixed_cum,grad_v_sup,grad_logv_sup";
    for (double p : dc.p_list) os << ",lp_" << short_num(p);
    for (auto& pr : dc.pr_list)
        os << ",cum_" << short_num(pr.first) << "_" << short_num(pr.second);
    os << "\n";
}

inline void write_diag_row(std::ostream& os, const DiagRecord& r) {
    os << std::setprecision(17);
    os << r.t << "," << r.mass_u << "," << r.sup_u << "," << r.min_v << "," << r.max_v << ","
       << r.sup_w << "," << r.int_w << "," << r.cum_grad_w_sq << "," << r.int_u_pow_m1 << ","
       << r.du_grad_u_l2_cum << "," << r.grad_um1_l2_cum << "," << r.mixed_cum << ","
       << r.grad_v_sup << "," << r.grad_logv_sup;
    for (double x : r.lp) os << "," << x;
    for (double x : r.cum_lp_r) os << "," << x;
    os << "\n";
}

struct DiagSeries {
    DiagConfig config;
    std::vector<DiagRecord> records;
};

inline DiagSeries read_diag_csv(std::istream& is, const std::string& path = "<stream>") {
    DiagSeries out;
    std::string line;
    if (!std::getline(is, line)) throw io_error("empty diagnostics CSV", path);
    std::vector<std::string> cols;
    {
        std::istringstream hs(line);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    for (const auto& c : cols) {
        if (c.rfind("lp_", 0) == 0) out.config.p_list.push_back(std::stod(c.substr(3)));
        else if (c.rfind("cum_", 0) == 0 && c != "cum_grad_w_sq") {
            auto rest = c.substr(4);
            auto us = rest.find('_');
            out.config.pr_list.emplace_back(std::stod(rest.substr(0, us)),
                                            std::stod(rest.substr(us + 1)));
        }
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != cols.size()) throw io_error("ragged diagnostics CSV row", path);
        DiagRecord r;
        std::size_t i = 0;
        r.t = vals[i++]; r.mass_u = vals[i++]; r.sup_u = vals[i++]; r.min_v = vals[i++];
        r.max_v = vals[i++]; r.sup_w = vals[i++]; r.int_w = vals[i++];
        r.cum_grad_w_sq = vals[i++]; r.int_u_pow_m1 = vals[i++];
        r.du_grad_u_l2_cum = vals[i++]; r.grad_um1_l2_cum = vals[i++]; r.mixed_cum = vals[i++];
        r.grad_v_sup = vals[i++]; r.grad_logv_sup = vals[i++];
        for (std::size_t k = 0; k < out.config.p_list.size(); ++k) r.lp.push_back(vals[i++]);
        for (std::size_t k = 0; k < out.config.pr_list.size(); ++k) r.cum_lp_r.push_back(vals[i++]);
        out.records.push_back(std::move(r));
    }
    return out;
}

// ---- audits ----------------------------------------------------------------

struct AuditEntry {
    std::string name;
    bool pass = false;
    double max_ratio = 0.0; // meaning depends on the check, reported either way
    double worst_t = 0.0;
    std::string detail;
};

struct AuditReport {
    std::vector<AuditEntry> entries;
    bool all_pass() const {
        for (auto& e : entries) if (!e.pass) return false;
        return true;
    }
    void print(std::ostream& os) const {
        for (auto& e : entries) {
            os << (e.pass ? "PASS" : "FAIL") << " " << e.name
               << " ratio=" << std::setprecision(6) << e.max_ratio
               << " t=" << e.worst_t;
            if (!e.detail.empty()) os << " " << e.detail;
            os << "\n";
        }
    }
};

inline AuditEntry audit_mass(const std::vector<DiagRecord>& series) {
    if (series.size() < 2) throw parameter_error("audit_mass needs at least 2 samples");
    AuditEntry e;
    e.name = "mass_conservation";
    const double m0 = series.front().mass_u;
    double worst = 0.0, worst_t = 0.0;
    for (auto& r : series) {
        const double d = std::abs(r.mass_u - m0);
        if (d > worst) { worst = d; worst_t = r.t; }
    }
    if (m0 > 0.0) {
        e.max_ratio = worst / m0;
        e.pass = e.max_ratio <= 1e-10;
    } else {
        e.max_ratio = worst;
        e.pass = worst <= 1e-14;
        e.detail = "(absolute branch, mass(0)=0)";
    }
    e.worst_t = worst_t;
    return e;
}

// A priori energy budget: cum int int |grad w|^2 <= int w0 + t int u0.
inline AuditEntry audit_energy_w(const std::vector<DiagRecord>& series, double int_w0,
                                 double int_u0, double slack = 0.05) {
    AuditEntry e;
    e.name = "energy_budget_grad_w";
    double worst = 0.0, worst_t = 0.0;
    for (auto& r : series) {
        const double rhs = int_w0 + r.t * int_u0;
        if (rhs <= 0.0) continue;
        const double ratio = r.cum_grad_w_sq / rhs;
        if (ratio > worst) { worst = ratio; worst_t = r.t; }
    }
    e.max_ratio = worst;
    e.worst_t = worst_t;
    e.pass = worst <= 1.0 + slack;
    return e;
}

enum class EnvelopeShape { linear, power };

inline double diag_functional(const DiagRecord& r, const std::string& name,
                              const DiagConfig& dc) {
    if (name == "mass_u") return r.mass_u;
    if (name == "sup_u") return r.sup_u;
    if (name == "sup_w") return r.sup_w;
    if (name == "int_w") return r.int_w;
    if (name == "cum_grad_w_sq") return r.cum_grad_w_sq;
    if (name == "int_u_pow_m1") return r.int_u_pow_m1;
    if (name == "du_grad_u_l2_cum") return r.du_grad_u_l2_cum;
    if (name == "grad_um1_l2_cum") return r.grad_um1_l2_cum;
    if (name == "mixed_cum") return r.mixed_cum;
    if (name.rfind("lp_", 0) == 0) {
        const double p = std::stod(name.substr(3));
        for (std::size_t i = 0; i < dc.p_list.size(); ++i)
            if (dc.p_list[i] == p) return r.lp[i];
    }
    if (name.rfind("cum_", 0) == 0) {
        auto rest = name.substr(4);
        auto us = rest.find('_');
        if (us != std::string::npos) {
            const double p = std::stod(rest.substr(0, us)), rr = std::stod(rest.substr(us + 1));
            for (std::size_t i = 0; i < dc.pr_list.size(); ++i)
                if (dc.pr_list[i].first == p && dc.pr_list[i].second == rr) return r.cum_lp_r[i];
        }
    }
    throw parameter_error("unknown diagnostic functional: " + name);
}

// Checks growth shape f(t) <= C (1+t)^e: pass when the ratio f/(1+t)^e either
// attains its max in the first half of the window or is nonincreasing over
// the last quarter.
inline AuditEntry audit_growth_envelope(const std::vector<DiagRecord>& series,
                                        const std::string& name, EnvelopeShape shape,
                                        const DiagConfig& dc, double r_exponent = 0.0) {
    if (series.empty()) throw parameter_error("audit_growth_envelope: empty series");
    const double e = (shape == EnvelopeShape::linear) ? 1.0 : r_exponent + 1.0;
    AuditEntry out;
    out.name = "growth_envelope_" + name;
    std::vector<double> ratio(series.size());
    double cmax = -std::numeric_limits<double>::infinity();
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        ratio[i] = diag_functional(series[i], name, dc) / std::pow(1.0 + series[i].t, e);
        if (ratio[i] > cmax) { cmax = ratio[i]; argmax = i; }
    }
    out.max_ratio = cmax;
    out.worst_t = series[argmax].t;
    const double t0 = series.front().t, t1 = series.back().t;
    const bool early = series[argmax].t <= t0 + 0.5 * (t1 - t0);
    bool tail_monotone = true;
    const double tq = t1 - 0.25 * (t1 - t0);
    // absolute cushion so functionals sitting at the roundoff floor cannot
    // fail the shape check on noise alone
    const double cushion = 1e-16 * std::max(1.0, cmax);
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i - 1].t < tq) continue;
        if (ratio[i] > ratio[i - 1] * (1.0 + 1e-12) + cushion) { tail_monotone = false; break; }
    }
    out.pass = early || tail_monotone;
    out.detail = early ? "(max attained early)" : (tail_monotone ? "(tail nonincreasing)" : "");
    return out;
}

inline AuditEntry audit_pointwise_bounds(const std::vector<DiagRecord>& series, double v0_max,
                                         double w_cap) {
    AuditEntry e;
    e.name = "pointwise_bounds_v_w";
    bool ok = true;
    double worst = 0.0, worst_t = 0.0, max_sup_w = 0.0;
    for (auto& r : series) {
        if (!(r.min_v > 0.0)) { ok = false; worst_t = r.t; }
        const double ratio = r.max_v / v0_max;
        if (ratio > worst) { worst = ratio; if (ratio > 1.0 + 1e-12) { ok = false; worst_t = r.t; } }
        max_sup_w = std::max(max_sup_w, r.sup_w);
        if (r.sup_w > w_cap) { ok = false; worst_t = r.t; }
    }
    e.pass = ok;
    e.max_ratio = worst;
    e.worst_t = worst_t;
    e.detail = "max_sup_w=" + std::to_string(max_sup_w);
    return e;
}

} // namespace chemotaxsim
