#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "chemotaxsim/grid.hpp"

using namespace chemotaxsim;

namespace {

GridSpec unit_square(int n) { return GridSpec::make(2, {n, n}, {1.0, 1.0}); }
GridSpec unit_interval(int n) { return GridSpec::make(1, {n}, {1.0}); }

ScalarField random_field(const GridSpec& g, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    ScalarField f(g);
    for (auto& v : f.values) v = dist(rng);
    return f;
}

} // namespace

TEST_CASE("grid spec validation") {
    CHECK_THROWS_AS(GridSpec::make(0, {}, {}), parameter_error);
    CHECK_THROWS_AS(GridSpec::make(2, {1, 4}, {1.0, 1.0}), parameter_error);
    CHECK_THROWS_AS(GridSpec::make(2, {4, 4}, {1.0, -1.0}), parameter_error);
    CHECK_THROWS_AS(GridSpec::make(2, {4}, {1.0, 1.0}), parameter_error);
    GridSpec g = GridSpec::make(3, {4, 5, 6}, {1.0, 2.0, 3.0});
    CHECK(g.total_cells() == 120);
    CHECK(g.measure() == Catch::Approx(6.0));
    CHECK(g.cell_volume() == Catch::Approx(6.0 / 120.0));
}

TEST_CASE("integrate basics") {
    ScalarField f(unit_square(10), 3.0);
    CHECK(integrate(f) == Catch::Approx(3.0).margin(1e-14));
    ScalarField z(unit_square(10), 0.0);
    CHECK(integrate(z) == 0.0);

    // midpoint rule is exact for linear integrands: int_0^1 int_0^1 x = 1/2
    GridSpec g = unit_square(4);
    ScalarField lin(g);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) lin[g.index(i, j, 0)] = g.center(0, i);
    CHECK(integrate(lin) == Catch::Approx(0.5).epsilon(1e-14));

    ScalarField bad(unit_square(4), 1.0);
    bad[0] = std::nan("");
    CHECK_THROWS_AS(integrate(bad), data_integrity_error);
}

TEST_CASE("lp_norm basics") {
    const double inf = std::numeric_limits<double>::infinity();
    ScalarField f(unit_square(8), 2.0);
    CHECK(lp_norm(f, 3.0) == Catch::Approx(2.0).epsilon(1e-13));
    ScalarField neg(unit_square(8), -2.0);
    CHECK(lp_norm(neg, inf) == Catch::Approx(2.0));
    CHECK_THROWS_AS(lp_norm(f, 0.5), parameter_error);

    // indicator-like: half the cells 1, half 0, |Omega| = 1, p = 2
    GridSpec g = unit_square(8);
    ScalarField ind(g, 0.0);
    for (std::size_t c = 0; c < ind.size() / 2; ++c) ind[c] = 1.0;
    CHECK(lp_norm(ind, 2.0) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-13));
}

TEST_CASE("quadrature consistency: lp_norm(f,1) equals integrate(|f|)") {
    ScalarField f = random_field(unit_square(16), 42);
    ScalarField af = f;
    for (auto& v : af.values) v = std::abs(v);
    CHECK(lp_norm(f, 1.0) == Catch::Approx(integrate(af)).epsilon(1e-13));
}

TEST_CASE("face_gradient basics") {
    ScalarField c(unit_square(6), 7.0);
    FaceField g = face_gradient(c);
    for (int a = 0; a < 2; ++a)
        for (double v : g.axis[a]) CHECK(v == 0.0);

    GridSpec line = GridSpec::make(1, {2}, {1.0});
    ScalarField f(line);
    f[0] = 0.0;
    f[1] = 1.0;
    FaceField gf = face_gradient(f);
    CHECK(gf.axis[0][0] == 0.0);          // boundary
    CHECK(gf.axis[0][1] == Catch::Approx(2.0)); // (1-0)/0.5
    CHECK(gf.axis[0][2] == 0.0);          // boundary
}

TEST_CASE("face_gradient converges at second order for cosine data") {
    auto max_err = [](int n) {
        GridSpec g = unit_interval(n);
        ScalarField f(g);
        for (int i = 0; i < n; ++i) f[i] = std::cos(M_PI * g.center(0, i));
        FaceField gf = face_gradient(f);
        double err = 0.0;
        for (int i = 1; i < n; ++i) {
            const double x = i * g.spacing[0];
            err = std::max(err, std::abs(gf.axis[0][i] + M_PI * std::sin(M_PI * x)));
        }
        return err;
    };
    const double e1 = max_err(32), e2 = max_err(64);
    CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("grad_l2_sq: zero iff constant, scaling, refinement limit") {
    ScalarField c(unit_square(12), 4.2);
    CHECK(grad_l2_sq(c) == 0.0);

    ScalarField f = random_field(unit_square(12), 7);
    const double base = grad_l2_sq(f);
    CHECK(base > 0.0);
    ScalarField cf = f;
    for (auto& v : cf.values) v *= 3.0;
    CHECK(grad_l2_sq(cf) == Catch::Approx(9.0 * base).epsilon(1e-12));

    // int_0^1 pi^2 sin^2(pi x) = pi^2/2
    auto value = [](int n) {
        GridSpec g = unit_interval(n);
        ScalarField f(g);
        for (int i = 0; i < n; ++i) f[i] = std::cos(M_PI * g.center(0, i));
        return grad_l2_sq(f);
    };
    const double exact = M_PI * M_PI / 2.0;
    const double e1 = std::abs(value(32) - exact), e2 = std::abs(value(64) - exact);
    CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("div_flux hand case and conservation") {
    GridSpec g3 = GridSpec::make(1, {3}, {3.0}); // h = 1
    FaceField F(g3);
    F.axis[0][1] = 1.0;
    F.axis[0][2] = -1.0;
    ScalarField d = div_flux(F);
    CHECK(d[0] == Catch::Approx(1.0));
    CHECK(d[1] == Catch::Approx(-2.0));
    CHECK(d[2] == Catch::Approx(1.0));

    FaceField z(unit_square(5));
    ScalarField dz = div_flux(z);
    for (double v : dz.values) CHECK(v == 0.0);

    // discrete divergence theorem on random interior fluxes
    GridSpec g = unit_square(16);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    FaceField R(g);
    double fmax = 0.0;
    std::size_t nfaces = 0;
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 17; ++i)
            for (int j = 0; j < 16; ++j) {
                const int other = j;
                if (i == 0 || i == 16) continue;
                const std::size_t f = (a == 0) ? R.findex(0, i, other, 0) : R.findex(1, other, i, 0);
                R.axis[a][f] = dist(rng);
                fmax = std::max(fmax, std::abs(R.axis[a][f]));
                ++nfaces;
            }
    CHECK(std::abs(integrate(div_flux(R))) <= 1e-12 * fmax * static_cast<double>(nfaces));

    FaceField bad(unit_square(4));
    bad.axis[0][bad.findex(0, 0, 2, 0)] = 1.0;
    CHECK_THROWS_AS(div_flux(bad), contract_error);
}

TEST_CASE("cellwise_grad_sq is consistent with grad_l2_sq") {
    ScalarField f = random_field(unit_square(10), 5);
    ScalarField cw = cellwise_grad_sq(face_gradient(f));
    CHECK(integrate(cw) == Catch::Approx(grad_l2_sq(f)).epsilon(1e-12));
}

TEST_CASE("CHEMOFIELD snapshot roundtrip is exact") {
    GridSpec g = GridSpec::make(2, {4, 3}, {2.0, 1.5});
    ScalarField f = random_field(g, 11, 0.0, 10.0);
    std::stringstream ss;
    write_chemofield(ss, f, 0.75);
    FieldSnapshot snap = read_chemofield(ss);
    CHECK(snap.t == 0.75);
    REQUIRE(snap.field.grid.same_shape(g));
    for (std::size_t c = 0; c < f.size(); ++c) CHECK(snap.field[c] == f[c]);

    std::stringstream bad("JUNK v1\n");
    CHECK_THROWS_AS(read_chemofield(bad), io_error);
}
