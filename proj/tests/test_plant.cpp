#include <doctest.h>

#include <cmath>
#include <random>

#include "bbcu/analysis.hpp"
#include "bbcu/plant.hpp"
#include "bbcu/sim.hpp"

using namespace bbcu;

namespace {
PlantParams table1(double rd) {
    PlantParams p;
    p.R_D = rd;
    return p;
}
}  // namespace

TEST_CASE("derived parameters") {
    const DerivedParams d = derive(table1(300.0));
    CHECK(d.R_DH == doctest::Approx(0.09996667777).epsilon(1e-9));
    CHECK(d.alpha == doctest::Approx(12504.1666667).epsilon(1e-9));
    CHECK(d.beta_H == doctest::Approx(3.375e6).epsilon(1e-12));
    CHECK(d.beta_L == doctest::Approx(7e5).epsilon(1e-12));

    // parallel-resistor symmetry
    PlantParams p = table1(0.1);
    CHECK(derive(p).R_DH == doctest::Approx(p.R_H / 2.0));

    PlantParams bad = table1(300.0);
    bad.L = -1.0;
    CHECK_THROWS_AS(derive(bad), ParamError);
    bad = table1(300.0);
    bad.E_L = 300.0;  // voltage margin
    CHECK_THROWS_AS(validate(bad), ParamError);
}

TEST_CASE("equilibria satisfy the closed forms and zero the rhs") {
    const PlantParams p = table1(300.0);
    const DerivedParams d = derive(p);

    const PlantState e0 = equilibrium(0, p);
    CHECK(e0.x1 == doctest::Approx(-280.0).epsilon(1e-12));
    CHECK(e0.x2 == doctest::Approx(269.910029990).epsilon(1e-9));
    CHECK(e0.x3 == 0.0);

    const PlantState e1 = equilibrium(1, p);
    CHECK(e1.x2 == doctest::Approx(148.9751708).epsilon(1e-9));
    CHECK(e1.x3 == e1.x2);  // exact by construction

    // residuals relative to the forcing scale
    for (int u = 0; u <= 1; ++u) {
        const PlantState e = equilibrium(u, p);
        const PlantState f = rhs(e, u, d, p);
        CHECK(std::abs(f.x1) / d.beta_H < 1e-9);
        CHECK(std::abs(f.x2) / d.beta_H < 1e-9);
        CHECK(std::abs(f.x3) / d.beta_H < 1e-9);
    }
    CHECK_THROWS(equilibrium(2, p));
}

TEST_CASE("rhs at the origin keeps only source terms") {
    const PlantParams p = table1(300.0);
    const DerivedParams d = derive(p);
    const PlantState f = rhs({0, 0, 0}, 0.0, d, p);
    CHECK(f.x1 == 0.0);
    CHECK(f.x2 == doctest::Approx(d.beta_H));
    CHECK(f.x3 == doctest::Approx(d.beta_L));
}

TEST_CASE("rhs is affine in u") {
    const PlantParams p = table1(17.0);
    const DerivedParams d = derive(p);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-50.0, 300.0);
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const PlantState x{ux(rng), std::abs(ux(rng)) + 1.0, std::abs(ux(rng)) * 0.2 + 1.0};
        const double u = uu(rng);
        const PlantState f0 = rhs(x, 0.0, d, p);
        const PlantState fu = rhs(x, u, d, p);
        CHECK(fu.x1 == doctest::Approx(f0.x1 + u * x.x2 / p.L).epsilon(1e-12));
        CHECK(fu.x2 == doctest::Approx(f0.x2 - u * x.x1 / p.C_H).epsilon(1e-12));
        CHECK(fu.x3 == doctest::Approx(f0.x3).epsilon(1e-12));
    }
}

TEST_CASE("u=1 dynamic matrix entries and Hurwitz property") {
    const PlantParams p = table1(300.0);
    const auto A = dynamic_matrix_u1(p);
    CHECK(A[1] == doctest::Approx(100.0));     // 1/L
    CHECK(A[8] == doctest::Approx(-25000.0));  // -1/(R_L C_L)
    const double tr = A[0] + A[4] + A[8];
    CHECK(tr < 0.0);
    CHECK(spectral_abscissa(A) < 0.0);
    CHECK(routh_hurwitz_cubic(char_poly_3x3(A)));
}

TEST_CASE("fixed-u integration converges to the equilibria") {
    const PlantParams p = table1(300.0);
    for (int u = 0; u <= 1; ++u) {
        const PlantState e = equilibrium(u, p);
        const PlantState x =
            integrate_fixed_u({0.0, 270.0, 28.0}, double(u), 5.0, 1e-5, p);
        const double scale =
            std::sqrt(e.x1 * e.x1 + e.x2 * e.x2 + e.x3 * e.x3);
        const double err = std::sqrt((x.x1 - e.x1) * (x.x1 - e.x1) +
                                     (x.x2 - e.x2) * (x.x2 - e.x2) +
                                     (x.x3 - e.x3) * (x.x3 - e.x3));
        CHECK(err / scale < 1e-4);
    }
}

TEST_CASE("translated-pair energy is non-increasing under shared bounded u") {
    const PlantParams p = table1(300.0);
    const DerivedParams d = derive(p);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ux(-30.0, 30.0);
    std::uniform_real_distribution<double> uu(0.0, 1.0);
    const double dt = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        PlantState a{ux(rng), 250.0 + ux(rng), 28.0 + 0.3 * ux(rng)};
        PlantState b{ux(rng), 250.0 + ux(rng), 28.0 + 0.3 * ux(rng)};
        auto V = [&] {
            const double y1 = a.x1 - b.x1, y2 = a.x2 - b.x2, y3 = a.x3 - b.x3;
            return 0.5 * (p.L * y1 * y1 + p.C_H * y2 * y2 + p.C_L * y3 * y3);
        };
        double Vprev = V();
        const double V0 = Vprev;
        for (int seg = 0; seg < 40; ++seg) {
            const double u = uu(rng);
            for (int i = 0; i < 500; ++i) {
                a = rk4_step(a, u, dt, d, p);
                b = rk4_step(b, u, dt, d, p);
            }
            const double Vnow = V();
            CHECK(Vnow <= Vprev * (1.0 + 1e-12) + 1e-12 * V0);
            Vprev = Vnow;
        }
    }
}
