#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "laplab/classical.hpp"
#include "laplab/grid.hpp"

using namespace laplab;

namespace {

PotentialSpec soft_power(double c0 = 1.0, double nu = 1.0) {
    PotentialSpec s;
    s.family = PotentialFamily::soft_power;
    s.terms = {{c0, nu}};
    s.nu = nu;
    s.c_low = c0;
    return s;
}

PotentialSpec flat(double depth) {
    PotentialSpec s;
    s.family = PotentialFamily::constant;
    s.v0 = depth;
    return s;
}

} // namespace

TEST_CASE("zero force gives straight-line motion") {
    PotentialSpec s = flat(0.5);
    Vec3 x0{1.0, 0.5, 0.0}, p0{0.3, 0.2, 0.1};
    OrbitTrace tr = integrate_orbit(s, x0, p0, 10.0, 0.05, 101);
    REQUIRE(tr.size() == 101);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        double t = tr.t(i);
        for (int c = 0; c < 3; ++c)
            CHECK(tr.states[i].x[c] == Catch::Approx(x0[c] + p0[c] * t).margin(1e-12));
    }
    CHECK(tr.energy_drift < 1e-14);
}

TEST_CASE("radial outgoing flat-mode orbit has identically zero margin") {
    PotentialSpec s = flat(0.5); // a(0, r) = 1
    OrbitTrace tr = integrate_orbit(s, {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, 20.0, 0.05, 101);
    auto grid = share(RadialGrid::table(25.0, 1.02, 3));
    EffTimeTable table = build_efftime(s, 0.0, grid, 1e-10);
    auto m = check_escape_inequality(tr, table);
    CHECK(m[0] == 0.0);
    for (double v : m) CHECK(std::abs(v) < 1e-9);
    auto d2 = d2tau_along_orbit(tr, table);
    for (double v : d2) CHECK(std::abs(v) < 1e-7);
    CHECK(tr.escaped_2x);
}

TEST_CASE("circular initial data stays circular") {
    PotentialSpec s = soft_power();
    auto [st, lambda] = circular_orbit(s, 2.0);
    CHECK(st.energy(s) == Catch::Approx(lambda).margin(1e-14));
    OrbitTrace tr = integrate_orbit(s, st.x, st.p, 100.0, 5e-3, 401);
    for (std::size_t i = 0; i < tr.size(); ++i)
        CHECK(tr.r(i) == Catch::Approx(2.0).epsilon(1e-4));
    CHECK(tr.energy_drift < 1e-6);
    CHECK_FALSE(tr.escaped_2x);
}

TEST_CASE("escape margins and convexity on a random surface ensemble") {
    PotentialSpec s = soft_power();
    double lambda = 0.5;
    auto grid = share(RadialGrid::table(90.0, 1.01, 3));
    EffTimeTable table = build_efftime(s, lambda, grid, 1e-10);
    auto starts = sample_orbits(s, lambda, 20, 42, 0.5, 8.0);
    REQUIRE(starts.size() == 20);
    for (const auto& st : starts) {
        CHECK(st.energy(s) == Catch::Approx(lambda).margin(1e-12));
        CHECK(st.p_r() > 0.0);
        OrbitTrace tr = integrate_orbit(s, st.x, st.p, 40.0, 2e-3, 201);
        CHECK(tr.energy_drift <= 1e-6);
        auto m = check_escape_inequality(tr, table);
        CHECK(m[0] == 0.0);
        for (double v : m) CHECK(v >= -1e-6);
        auto d2 = d2tau_along_orbit(tr, table);
        for (double v : d2) CHECK(v >= -1e-6);
    }
}

TEST_CASE("finite-difference convexity series matches the closed form") {
    PotentialSpec s = soft_power();
    double lambda = 0.5;
    auto starts = sample_orbits(s, lambda, 1, 7, 2.0, 2.0, 0.3);
    OrbitTrace tr = integrate_orbit(s, starts[0].x, starts[0].p, 10.0, 1e-3, 2001);
    auto grid = share(RadialGrid::table(30.0, 1.01, 3));
    EffTimeTable table = build_efftime(s, lambda, grid, 1e-10);
    auto d2 = d2tau_along_orbit(tr, table);
    for (std::size_t i = 1; i + 1 < tr.size(); i += 100) {
        double exact = d2tau_exact(s, lambda, tr.states[i]);
        CHECK(d2[i - 1] == Catch::Approx(exact).margin(1e-4).epsilon(1e-2));
    }
}

TEST_CASE("flow is time reversible at integrator accuracy") {
    PotentialSpec s = soft_power();
    double lambda = 0.5;
    auto starts = sample_orbits(s, lambda, 1, 3, 1.0, 1.0, 0.2);
    OrbitTrace fwd = integrate_orbit(s, starts[0].x, starts[0].p, 15.0, 1e-3, 151);
    OrbitState last = fwd.states.back();
    Vec3 pneg{-last.p[0], -last.p[1], -last.p[2]};
    OrbitTrace bwd = integrate_orbit(s, last.x, pneg, 15.0, 1e-3, 151);
    REQUIRE(bwd.size() == fwd.size());
    std::size_t n = fwd.size();
    for (std::size_t i = 0; i < n; ++i)
        CHECK(bwd.r(i) == Catch::Approx(fwd.r(n - 1 - i)).margin(1e-5));
}

TEST_CASE("head-on infall reports a near-origin event") {
    PotentialSpec s = soft_power();
    double a1 = speed_a(s, 0.5, 1.0);
    OrbitTrace tr = integrate_orbit(s, {1.0, 0.0, 0.0}, {-a1, 0.0, 0.0}, 5.0, 1e-3, 501, 1e-2);
    CHECK(tr.near_origin);
    CHECK(tr.states.back().r() < 0.05);
}

TEST_CASE("argument errors") {
    PotentialSpec s = soft_power();
    auto grid = share(RadialGrid::table(30.0, 1.02, 3));
    EffTimeTable t1 = build_efftime(s, 1.0, grid);
    auto starts = sample_orbits(s, 0.5, 1, 1, 1.0, 2.0);
    OrbitTrace tr = integrate_orbit(s, starts[0].x, starts[0].p, 5.0, 1e-2, 51);
    CHECK_THROWS_AS(check_escape_inequality(tr, t1), std::invalid_argument); // wrong energy
    tr.states.resize(2);
    EffTimeTable t05 = build_efftime(s, 0.5, grid);
    CHECK_THROWS_AS(d2tau_along_orbit(tr, t05), std::invalid_argument); // too short
    CHECK_THROWS_AS(integrate_orbit(s, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, 1.0, 0.1),
                    std::invalid_argument);
}

TEST_CASE("surface sampling is deterministic and on the surface") {
    PotentialSpec s = soft_power();
    auto a = sample_orbits(s, 2.0, 10, 99);
    auto b = sample_orbits(s, 2.0, 10, 99);
    auto c = sample_orbits(s, 2.0, 10, 100);
    REQUIRE(a.size() == 10);
    bool all_equal = true, any_diff = false;
    for (std::size_t i = 0; i < 10; ++i) {
        all_equal = all_equal && a[i].x == b[i].x && a[i].p == b[i].p;
        any_diff = any_diff || a[i].x != c[i].x;
        CHECK(a[i].energy(s) == Catch::Approx(2.0).margin(1e-12));
        double r = a[i].r();
        CHECK(r >= 0.5);
        CHECK(r <= 20.0);
    }
    CHECK(all_equal);
    CHECK(any_diff);

    PotentialSpec s2 = soft_power();
    s2.dim = 2;
    for (const auto& st : sample_orbits(s2, 1.0, 5, 17)) {
        CHECK(st.x[2] == 0.0);
        CHECK(st.p[2] == 0.0);
    }
}

TEST_CASE("trace CSV has the expected shape") {
    PotentialSpec s = flat(0.5);
    OrbitTrace tr = integrate_orbit(s, {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, 2.0, 0.05, 5);
    auto grid = share(RadialGrid::table(5.0, 1.05, 3));
    EffTimeTable table = build_efftime(s, 0.0, grid);
    auto m = check_escape_inequality(tr, table);
    std::ostringstream os;
    write_orbit_csv(os, tr, table, m);
    std::string text = os.str();
    CHECK(text.rfind("t,x1,x2,x3,p1,p2,p3,E,tau,margin\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6); // header + 5 rows
}
