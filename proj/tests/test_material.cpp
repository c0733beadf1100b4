#include <catch2/catch_amalgamated.hpp>

#include "febe/material.hpp"
#include "febe/quadrature.hpp"

using namespace febe;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("rho power law") {
    CHECK_THAT(MaterialLaw(3, 1, 1e-5).rho(1.0), WithinRel(1.00001, 1e-14));
    CHECK_THAT(MaterialLaw(2, 1, 0.3).rho(0.7), WithinRel(1.0, 1e-14));
    CHECK(MaterialLaw(3, 1, 0.0).rho(0.0) == 0.0);
}

TEST_CASE("energy density closed form") {
    MaterialLaw l2(2, 0, 0.1);
    CHECK_THAT(l2.energy_density(0.7), WithinRel(0.49 / 2.0, 1e-13));
    MaterialLaw l3(3, 1, 0.0);
    CHECK_THAT(l3.energy_density(0.9), WithinRel(0.9 * 0.9 * 0.9 / 3.0, 1e-13));
    CHECK(l3.energy_density(0.0) == 0.0);

    // against quadrature of int_0^1 s (eps + s) ds
    MaterialLaw l(3, 1, 1e-5);
    double quad = 0.0;
    {
        const auto& g = line_rule(8);
        for (int piece = 0; piece < 16; ++piece)
            for (std::size_t q = 0; q < g.points.size(); ++q) {
                double s = (piece + g.points[q]) / 16.0;
                quad += g.weights[q] / 16.0 * s * l.rho(s);
            }
    }
    CHECK_THAT(quad, WithinRel(1.0 / 3.0 + 0.5e-5, 1e-12));
    CHECK_THAT(l.energy_density(1.0), WithinRel(quad, 1e-12));

    // q' = t rho(t) by central differences
    for (double t : {0.3, 1.0, 2.5}) {
        double h = 1e-6;
        double d = (l.energy_density(t + h) - l.energy_density(t - h)) / (2 * h);
        CHECK_THAT(d, WithinRel(t * l.rho(t), 1e-8));
    }
}

TEST_CASE("omega weight") {
    CHECK_THAT(MaterialLaw(3, 1, 0).omega(0, 2), WithinRel(2.0, 1e-14));
    CHECK_THAT(MaterialLaw(3, 0, 0).omega(1, 1), WithinRel(3.0, 1e-14));
    CHECK_THAT(MaterialLaw(3, 0.5, 0).omega(1, 1), WithinRel(std::sqrt(6.0), 1e-13));
}

TEST_CASE("G_p_delta") {
    MaterialLaw l(3, 1, 0);
    CHECK(l.g_pdelta(0, 0) == 0.0);
    CHECK_THAT(MaterialLaw(2, 0.5, 0).g_pdelta(5.0, 2.0), WithinRel(4.0, 1e-14));
    CHECK_THAT(l.g_pdelta(0, 2), WithinRel(8.0, 1e-13));
}

TEST_CASE("monotone bound of rho(t)t sampled") {
    MaterialLaw l(3, 0.5, 1e-5);
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        double s = rng.uniform(1e-6, 10.0), t = rng.uniform(1e-6, 10.0);
        if (s == t) continue;
        CHECK((l.rho(t) * t - l.rho(s) * s) * (t - s) > 0.0);
    }
}

TEST_CASE("rho derivative of the regularized power law") {
    MaterialLaw l(3.5, 1, 0.01);
    for (double t : {0.1, 0.9, 4.0}) {
        double h = 1e-6;
        double fd = (l.rho(t + h) - l.rho(t - h)) / (2 * h);
        CHECK_THAT(l.drho(t), WithinRel(fd, 1e-7));
    }
}

TEST_CASE("pointwise quasi-norm lower bounds") {
    Rng rng(11);
    for (int i = 0; i < 5000; ++i) {
        double p = 2.0 + 3.0 * rng.uniform();
        double delta = rng.uniform();
        MaterialLaw l(p, delta, 0);
        double x = 10.0 * rng.uniform(), y = 10.0 * rng.uniform();
        // omega^{p-2} y^2 >= y^p
        CHECK(l.g_pdelta(x, y) >= std::pow(y, p) * (1.0 - 1e-12));
        MaterialLaw l0(p, 0.0, 0);
        CHECK(l0.g_pdelta(x, y) >= y * y * (1.0 - 1e-12));  // delta = 0 case
        CHECK(l0.omega(x, y) >= 1.0);
    }
}

TEST_CASE("q is midpoint convex on a grid") {
    MaterialLaw l(3, 1, 1e-5);
    for (int i = 0; i < 200; ++i) {
        double a = i * 0.05, b = a + 0.05;
        double mid = l.energy_density(0.5 * (a + b));
        CHECK(mid <= 0.5 * (l.energy_density(a) + l.energy_density(b)) + 1e-12);
        CHECK(l.energy_density(b) >= l.energy_density(a) - 1e-15);  // increasing
    }
}

TEST_CASE("G monotone in second argument") {
    MaterialLaw l(3.2, 0.7, 0);
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        double x = 5.0 * rng.uniform();
        double y1 = 5.0 * rng.uniform(), y2 = y1 + 5.0 * rng.uniform();
        CHECK(l.g_pdelta(x, y2) >= l.g_pdelta(x, y1) * (1.0 - 1e-12));
    }
}

TEST_CASE("Young-type quasi-norm inequality sweep") {
    CHECK(young_quasi_bound(0.0, 3.0, 1.0, 0.5, 3.0));
    CHECK(young_quasi_bound(2.0, 0.0, 1.0, 0.5, 3.0));
    Rng rng(17);
    for (int i = 0; i < 1000000; ++i) {
        double lam = 10.0 * rng.uniform();
        double mu = 10.0 * rng.uniform();
        double a = 10.0 * rng.uniform();
        double eps = 1e-3 + 10.0 * rng.uniform();
        REQUIRE(young_quasi_bound(lam, mu, a, eps, 3.0));
    }
}
