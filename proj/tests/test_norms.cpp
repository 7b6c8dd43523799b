#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "laplab/norms.hpp"

using namespace laplab;

namespace {

// Flat attractive potential of depth 1/2 makes a = 1 at lambda = 0, so the
// travel time table is tau(r) = r and shell thresholds sit at 2, 4, 8, ...
EffTimeTable unit_speed_table(GridPtr grid) {
    PotentialSpec s;
    s.family = PotentialFamily::constant;
    s.v0 = 0.5;
    return build_efftime(s, 0.0, grid);
}

PartialWaveField indicator_field(GridPtr grid, double lo, double hi, double amp) {
    PartialWaveField f = PartialWaveField::zeros(grid, {0});
    f.analytic.resize(1);
    f.analytic[0] = [=](double r) { return cplx(r >= lo && r < hi ? amp : 0.0); };
    return f;
}

PartialWaveField random_field(GridPtr grid, std::mt19937_64& rng, std::size_t sectors = 2) {
    std::normal_distribution<double> n01;
    std::vector<int> ells(sectors);
    for (std::size_t k = 0; k < sectors; ++k) ells[k] = int(k);
    PartialWaveField f = PartialWaveField::zeros(grid, ells);
    for (auto& uk : f.u)
        for (auto& v : uk) v = cplx(n01(rng), n01(rng));
    return f;
}

} // namespace

TEST_CASE("travel-time shells weigh an indicator as expected") {
    auto grid = share(RadialGrid::table(20.0, 1.05, 3));
    EffTimeTable table = unit_speed_table(grid);
    DyadicDecomposition dec = DyadicDecomposition::from_tau(table);
    REQUIRE(dec.bounds.size() == 4); // thresholds 2, 4, 8, 16
    CHECK(dec.bounds[1] == Catch::Approx(4.0).epsilon(1e-12));
    CHECK(dec.shell_of(5.0) == 3);
    CHECK(dec.shell_of(1.0) == 1);

    // Unit mass concentrated on shell 3 = [4, 8).
    PartialWaveField f = indicator_field(grid, 4.0, 8.0, 0.5);
    auto mass = shell_masses(dec, f);
    REQUIRE(mass.size() == 5);
    CHECK(mass[2] == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(mass[0] + mass[1] + mass[3] + mass[4] < 1e-12);
    CHECK(norm_B(dec, f) == Catch::Approx(std::pow(2.0, 1.5)).epsilon(1e-9));
    CHECK(norm_Bstar(dec, f) == Catch::Approx(std::pow(2.0, -1.5)).epsilon(1e-9));
}

TEST_CASE("two unit-mass shells add in the summed norm") {
    auto grid = share(RadialGrid::table(20.0, 1.05, 3));
    DyadicDecomposition dec = DyadicDecomposition::from_tau(unit_speed_table(grid));
    PartialWaveField f = PartialWaveField::zeros(grid, {0});
    f.analytic.resize(1);
    double a2 = 1.0 / std::sqrt(2.0), a4 = 1.0 / std::sqrt(8.0);
    f.analytic[0] = [=](double r) {
        if (r >= 2.0 && r < 4.0) return cplx(a2);   // shell 2, mass 1
        if (r >= 8.0 && r < 16.0) return cplx(a4);  // shell 4, mass 1
        return cplx(0.0);
    };
    CHECK(norm_B(dec, f) == Catch::Approx(6.0).epsilon(1e-9)); // 2^1 + 2^2
    CHECK(norm_Bstar(dec, f) == Catch::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("plain shells with a scale offset") {
    auto grid = share(RadialGrid::table(20.0, 1.05, 3));
    DyadicDecomposition dec = DyadicDecomposition::from_abs_x(grid, 1);
    // Thresholds 1, 2, 4, 8, 16; [4, 8) is shell 4 and its weight uses n - m.
    CHECK(dec.shell_of(5.0) == 4);
    PartialWaveField f = indicator_field(grid, 4.0, 8.0, 0.5);
    CHECK(norm_B(dec, f) == Catch::Approx(std::pow(2.0, 1.5)).epsilon(1e-9));
    CHECK(norm_Bstar(dec, f) == Catch::Approx(std::pow(2.0, -1.5)).epsilon(1e-9));
}

TEST_CASE("Gaussian mass against the closed form, all evaluation paths") {
    auto grid = share(RadialGrid::table(12.0, 1.03, 3));
    double exact = 0.5 * std::sqrt(pi); // int_0^inf exp(-r^2) dr

    PartialWaveField fa = PartialWaveField::zeros(grid, {0});
    fa.analytic.resize(1);
    fa.analytic[0] = [](double r) { return cplx(std::exp(-0.5 * r * r)); };
    CHECK(l2_norm_sq(fa) == Catch::Approx(exact).epsilon(1e-10));

    PartialWaveField fh = PartialWaveField::zeros(grid, {0}, true);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        double r = grid->r[i];
        fh.u[0][i] = std::exp(-0.5 * r * r);
        fh.du[0][i] = -r * std::exp(-0.5 * r * r);
    }
    CHECK(l2_norm_sq(fh) == Catch::Approx(exact).epsilon(1e-6));

    PartialWaveField fl = fh;
    fl.du.clear();
    CHECK(l2_norm_sq(fl) == Catch::Approx(exact).epsilon(1e-6));
}

TEST_CASE("shell masses partition the total mass exactly") {
    auto grid = share(RadialGrid::table(40.0, 1.04, 3));
    std::mt19937_64 rng(7);
    PartialWaveField f = random_field(grid, rng);
    DyadicDecomposition dec = DyadicDecomposition::from_tau(unit_speed_table(grid));
    auto mass = shell_masses(dec, f);
    double sum = 0.0;
    for (double m : mass) sum += m;
    CHECK(sum == Catch::Approx(l2_norm_sq(f)).epsilon(1e-12));
}

TEST_CASE("duality and ordering of the shell norms") {
    auto grid = share(RadialGrid::table(40.0, 1.04, 3));
    DyadicDecomposition dec = DyadicDecomposition::from_tau(unit_speed_table(grid));
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        PartialWaveField f = random_field(grid, rng);
        PartialWaveField g = random_field(grid, rng);
        cplx ip = inner(f, g);
        CHECK(std::abs(ip) <= norm_B(dec, f) * norm_Bstar(dec, g) * (1.0 + 1e-12));
        CHECK(std::abs(ip - std::conj(inner(g, f))) < 1e-10 * std::abs(ip));
        CHECK(norm_Bstar(dec, f) <= norm_B(dec, f) * (1.0 + 1e-12));
    }
}

TEST_CASE("weighted norm dominates the summed shell norm at s = 1") {
    auto grid = share(RadialGrid::table(40.0, 1.04, 3));
    EffTimeTable table = unit_speed_table(grid);
    DyadicDecomposition dec = DyadicDecomposition::from_tau(table);
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        PartialWaveField f = random_field(grid, rng);
        CHECK(norm_B(dec, f) <= 3.0 * weighted_norm(f, 1.0, table));
    }
}

TEST_CASE("weighted norm closed form for a constant mode") {
    auto grid = share(RadialGrid::table(10.0, 1.05, 3));
    EffTimeTable table = unit_speed_table(grid);
    PartialWaveField f = PartialWaveField::zeros(grid, {0});
    f.analytic.resize(1);
    f.analytic[0] = [](double) { return cplx(1.0); };
    // s = 1 weight is (1 + tau^2) = (1 + r^2): integral R + R^3/3.
    double R = 10.0;
    CHECK(weighted_norm(f, 1.0, table) ==
          Catch::Approx(std::sqrt(R + R * R * R / 3.0)).epsilon(1e-9));
}

TEST_CASE("scale refinement: exact away from the origin, equivalent globally") {
    auto grid = share(RadialGrid::table(40.0, 1.04, 3));
    // Smooth bump supported in [4, 30]; refined decompositions only disagree
    // below 2^(1-m), so every m gives the same numbers here.
    PartialWaveField f = PartialWaveField::zeros(grid, {0});
    f.analytic.resize(1);
    f.analytic[0] = [](double r) {
        if (r <= 4.0 || r >= 30.0) return cplx(0.0);
        double t = (2.0 * r - 34.0) / 26.0; // maps (4,30) to (-1,1)
        return cplx(std::pow(1.0 - t * t, 3));
    };
    DyadicDecomposition d0 = DyadicDecomposition::from_abs_x(grid, 0);
    DyadicDecomposition d2 = DyadicDecomposition::from_abs_x(grid, 2);
    CHECK(norm_B(d0, f) == Catch::Approx(norm_B(d2, f)).epsilon(1e-10));
    CHECK(norm_Bstar(d0, f) == Catch::Approx(norm_Bstar(d2, f)).epsilon(1e-10));

    // A field reaching the origin feels the refinement, but only within the
    // fixed comparison factors.
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        PartialWaveField g = random_field(grid, rng, 1);
        DyadicDecomposition d1 = DyadicDecomposition::from_abs_x(grid, 1);
        double b0 = norm_B(d0, g), b1 = norm_B(d1, g);
        double s0 = norm_Bstar(d0, g), s1 = norm_Bstar(d1, g);
        CHECK(b1 >= b0 / std::sqrt(2.0) * (1.0 - 1e-12));
        CHECK(b1 <= b0 * std::sqrt(1.5) * (1.0 + 1e-12));
        CHECK(s1 >= s0 / std::sqrt(2.0) * (1.0 - 1e-12));
        CHECK(s1 <= s0 * std::sqrt(2.0) * (1.0 + 1e-12));
    }
}

TEST_CASE("mismatched grids are rejected") {
    auto g1 = share(RadialGrid::table(20.0, 1.05, 3));
    auto g2 = share(RadialGrid::table(20.0, 1.06, 3));
    DyadicDecomposition dec = DyadicDecomposition::from_abs_x(g1, 0);
    PartialWaveField f = PartialWaveField::zeros(g2, {0});
    CHECK_THROWS_AS(shell_masses(dec, f), std::invalid_argument);
}
