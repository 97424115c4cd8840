#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "chemotaxsim/diagnostics.hpp"
#include "chemotaxsim/run.hpp"

using namespace chemotaxsim;

namespace {

std::vector<DiagRecord> synthetic_series(int n, double t_end,
                                         double (*f)(double)) {
    std::vector<DiagRecord> s(n);
    for (int i = 0; i < n; ++i) {
        const double t = t_end * i / (n - 1);
        s[i].t = t;
        s[i].mass_u = f(t);
        s[i].sup_u = f(t);
        s[i].int_u_pow_m1 = f(t);
        s[i].min_v = 0.5;
        s[i].max_v = 1.0;
        s[i].sup_w = 0.1;
    }
    return s;
}

} // namespace

TEST_CASE("compute_record on homogeneous fields") {
    GridSpec g = GridSpec::make(2, {8, 8}, {2.0, 1.0}); // |Omega| = 2
    ScalarField u(g, 2.0), v(g, 0.5);
    auto spec = DiffusionSpec::power(1.0, 3.0);
    DiagConfig dc;
    dc.p_list = {2.0, 4.0};
    Cumulatives cum;
    DiagRecord r = compute_record(0.0, u, v, 1.0, spec, dc, cum);

    CHECK(r.mass_u == Catch::Approx(4.0));
    CHECK(r.sup_u == 2.0);
    CHECK(r.min_v == 0.5);
    CHECK(r.max_v == 0.5);
    CHECK(r.sup_w == Catch::Approx(std::log(2.0)));
    CHECK(r.int_w == Catch::Approx(2.0 * std::log(2.0)));
    CHECK(r.int_u_pow_m1 == Catch::Approx(2.0 * 4.0)); // u^2 = 4 on |Omega| = 2
    CHECK(r.grad_v_sup == 0.0);
    CHECK(r.grad_logv_sup == 0.0);
    REQUIRE(r.lp.size() == 2);
    // ||u||_p = 2 |Omega|^{1/p}
    CHECK(r.lp[0] == Catch::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(r.lp[1] == Catch::Approx(2.0 * std::pow(2.0, 0.25)).epsilon(1e-13));

    u[3] = std::nan("");
    CHECK_THROWS_AS(compute_record(0.0, u, v, 1.0, spec, dc, cum), data_integrity_error);
    u[3] = 2.0;
    v[3] = 0.0; // non-positive v is a positivity violation, not a data fault
    CHECK_THROWS_AS(compute_record(0.0, u, v, 1.0, spec, dc, cum), positivity_error);
}

TEST_CASE("diag_rates: constants give zero gradient rates") {
    GridSpec g = GridSpec::make(2, {6, 6}, {1.0, 1.0});
    ScalarField u(g, 1.5), v(g, 0.8);
    auto spec = DiffusionSpec::power(1.0, 2.0);
    DiagConfig dc;
    dc.pr_list = {{2.0, 4.0}};
    CumRates r = diag_rates(u, v, 1.0, spec, dc);
    CHECK(r.grad_w_sq == 0.0);
    CHECK(r.du_grad_u == 0.0);
    CHECK(r.grad_um1 == 0.0);
    CHECK(r.mixed == 0.0);
    REQUIRE(r.lp_pow_r.size() == 1);
    CHECK(r.lp_pow_r[0] == Catch::Approx(std::pow(1.5, 4.0)).epsilon(1e-12));

    // degenerate cells: u = 0 with m < 3 must not produce NaN in the mixed rate
    ScalarField uz(g, 0.0);
    for (int i = 0; i < 3; ++i) uz[i] = 1.0;
    auto deg = DiffusionSpec::power(1.0, 2.0);
    CumRates rz = diag_rates(uz, v, 1.0, deg, dc);
    CHECK(std::isfinite(rz.mixed));
    CHECK(std::isfinite(rz.grad_um1));
}

TEST_CASE("cumulatives: trapezoid rule is exact for linear rates") {
    Cumulatives cum;
    CumRates a, b;
    // rate r(t) = t on [0,1] in 10 steps -> integral 1/2 exactly
    const int n = 10;
    for (int i = 0; i < n; ++i) {
        a.grad_w_sq = static_cast<double>(i) / n;
        b.grad_w_sq = static_cast<double>(i + 1) / n;
        cum.advance(a, b, 1.0 / n);
    }
    CHECK(cum.grad_w_sq == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("audit_mass: pass, fault injection, absolute branch") {
    auto s = synthetic_series(20, 1.0, +[](double) { return 3.0; });
    AuditEntry ok = audit_mass(s);
    CHECK(ok.pass);
    CHECK(ok.max_ratio <= 1e-10);

    s[7].mass_u = 3.0 * (1.0 + 1e-6);
    AuditEntry bad = audit_mass(s);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_t == Catch::Approx(s[7].t));

    auto z = synthetic_series(5, 1.0, +[](double) { return 0.0; });
    AuditEntry az = audit_mass(z);
    CHECK(az.pass);
    z[2].mass_u = 1e-12;
    CHECK_FALSE(audit_mass(z).pass);

    std::vector<DiagRecord> one(1);
    CHECK_THROWS_AS(audit_mass(one), parameter_error);
}

TEST_CASE("audit_energy_w: budget and inflation fault") {
    // budget: int w0 = 1, int u0 = 2 -> rhs = 1 + 2t
    auto s = synthetic_series(10, 2.0, +[](double) { return 0.0; });
    for (auto& r : s) r.cum_grad_w_sq = 0.9 * (1.0 + 2.0 * r.t);
    AuditEntry ok = audit_energy_w(s, 1.0, 2.0);
    CHECK(ok.pass);
    CHECK(ok.max_ratio == Catch::Approx(0.9));

    for (auto& r : s) r.cum_grad_w_sq *= 10.0;
    AuditEntry bad = audit_energy_w(s, 1.0, 2.0);
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_ratio == Catch::Approx(9.0));
}

TEST_CASE("audit_growth_envelope: linear growth passes, quadratic fails") {
    DiagConfig dc;
    auto lin = synthetic_series(50, 10.0, +[](double t) { return 2.0 + 0.5 * t; });
    CHECK(audit_growth_envelope(lin, "mass_u", EnvelopeShape::linear, dc).pass);

    auto dec = synthetic_series(50, 10.0, +[](double t) { return 2.0 * std::exp(-t); });
    CHECK(audit_growth_envelope(dec, "mass_u", EnvelopeShape::linear, dc).pass);

    auto quad = synthetic_series(50, 10.0, +[](double t) { return (1.0 + t) * (1.0 + t); });
    CHECK_FALSE(audit_growth_envelope(quad, "mass_u", EnvelopeShape::linear, dc).pass);

    // power shape with r = 1 allows (1+t)^2
    CHECK(audit_growth_envelope(quad, "sup_u", EnvelopeShape::power, dc, 1.0).pass);
}

TEST_CASE("audit_pointwise_bounds: pass and fault injections") {
    auto s = synthetic_series(10, 1.0, +[](double) { return 1.0; });
    CHECK(audit_pointwise_bounds(s, 1.0, 1e3).pass);

    auto a = s; a[4].min_v = 0.0;
    CHECK_FALSE(audit_pointwise_bounds(a, 1.0, 1e3).pass);
    auto b = s; b[4].max_v = 1.0 + 1e-9;
    CHECK_FALSE(audit_pointwise_bounds(b, 1.0, 1e3).pass);
    auto c = s; c[4].sup_w = 2e3;
    CHECK_FALSE(audit_pointwise_bounds(c, 1.0, 1e3).pass);
}

TEST_CASE("diagnostics CSV roundtrip") {
    DiagConfig dc;
    dc.p_list = {2.0};
    dc.pr_list = {{3.0, 1.5}};
    std::vector<DiagRecord> s = synthetic_series(4, 1.0, +[](double t) { return 1.0 + t; });
    for (auto& r : s) {
        r.lp = {0.25 * r.t + 1.0};
        r.cum_lp_r = {r.t * r.t};
        r.cum_grad_w_sq = 0.125 * r.t;
    }
    std::stringstream ss;
    write_diag_header(ss, dc);
    for (auto& r : s) write_diag_row(ss, r);

    std::string header;
    std::getline(ss, header);
    CHECK(header ==
          "t,mass_u,sup_u,min_v,max_v,sup_w,int_w,cum_grad_w_sq,int_u_pow_m1,"
          "du_grad_u_l2_cum,grad_um1_l2_cum,mixed_cum,grad_v_sup,grad_logv_sup,"
          "lp_2,cum_3_1.5");

    ss.clear();
    ss.seekg(0);
    DiagSeries back = read_diag_csv(ss);
    REQUIRE(back.records.size() == s.size());
    REQUIRE(back.config.p_list == dc.p_list);
    REQUIRE(back.config.pr_list == dc.pr_list);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.records[i].t == s[i].t);
        CHECK(back.records[i].mass_u == s[i].mass_u);
        CHECK(back.records[i].cum_grad_w_sq == s[i].cum_grad_w_sq);
        CHECK(back.records[i].lp == s[i].lp);
        CHECK(back.records[i].cum_lp_r == s[i].cum_lp_r);
    }

    std::stringstream empty;
    CHECK_THROWS_AS(read_diag_csv(empty), io_error);
}

TEST_CASE("diag_functional name lookup") {
    DiagConfig dc;
    dc.p_list = {2.0};
    dc.pr_list = {{3.0, 1.5}};
    DiagRecord r;
    r.mass_u = 1.0;
    r.mixed_cum = 2.0;
    r.lp = {3.0};
    r.cum_lp_r = {4.0};
    CHECK(diag_functional(r, "mass_u", dc) == 1.0);
    CHECK(diag_functional(r, "mixed_cum", dc) == 2.0);
    CHECK(diag_functional(r, "lp_2", dc) == 3.0);
    CHECK(diag_functional(r, "cum_3_1.5", dc) == 4.0);
    CHECK_THROWS_AS(diag_functional(r, "nope", dc), parameter_error);
}

TEST_CASE("cumulative dissipation matches a closed-form heat-flow oracle") {
    // u = 0, v_t = Lap v with v(x,t) = 1 + a e^{-pi^2 t} cos(pi x) on (0,1);
    // w = -log(v / (1+a)), so int_0^T int |grad w|^2 = int int (v_x)^2 / v^2.
    const double a = 0.2, lam = M_PI * M_PI, T = 0.1;
    const int n = 64;
    GridSpec g = GridSpec::make(1, {n}, {1.0});
    ScalarField v0(g);
    for (int i = 0; i < n; ++i) v0[i] = 1.0 + a * std::cos(M_PI * g.center(0, i));
    InitialData data = InitialData::make(ScalarField(g, 0.0), std::move(v0));
    auto spec = DiffusionSpec::power(1.0, 2.0);
    SchemeConfig cfg;
    cfg.t_end = T;
    cfg.sample_every = T;
    cfg.dt_max = 5e-5;
    cfg.cfl_safety = 1.0;
    RunResult r = run(data, spec, cfg, Formulation::uv);
    REQUIRE(r.status == RunStatus::completed);

    // independent fine quadrature of the closed form (Simpson in x, trapezoid
    // on a fine t grid)
    auto space_int = [&](double t) {
        const double amp = a * std::exp(-lam * t);
        const int nx = 2000;
        double s = 0.0;
        for (int i = 0; i <= nx; ++i) {
            const double x = static_cast<double>(i) / nx;
            const double num = amp * M_PI * std::sin(M_PI * x);
            const double den = 1.0 + amp * std::cos(M_PI * x);
            const double f = num * num / (den * den);
            const double wgt = (i == 0 || i == nx) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += wgt * f;
        }
        return s / (3.0 * nx);
    };
    const int nt = 4000;
    double oracle = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double t0 = T * i / nt, t1 = T * (i + 1) / nt;
        oracle += 0.5 * (T / nt) * (space_int(t0) + space_int(t1));
    }
    const double got = r.series.back().cum_grad_w_sq;
    CHECK(std::abs(got - oracle) <= 0.01 * oracle);
}
