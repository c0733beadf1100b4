#include <catch2/catch_amalgamated.hpp>

#include "febe/fem.hpp"

using namespace febe;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::VectorXd interpolate(const Mesh& m, const std::function<double(const Vec2&)>& f) {
    Eigen::VectorXd u(m.num_nodes());
    for (int i = 0; i < m.num_nodes(); ++i) u[i] = f(m.nodes[i]);
    return u;
}

}  // namespace

TEST_CASE("energy of a linear field is area times the density") {
    Mesh m = build_lshape(1);
    MaterialLaw law(3, 1, 1e-5);
    NodalField u(m, interpolate(m, [](const Vec2& x) { return 2.0 * x.x - x.y; }));
    const double gn = std::hypot(2.0, 1.0);
    CHECK_THAT(assemble_energy(law, m, u),
               WithinRel(3.0 / 16.0 * law.energy_density(gn), 1e-12));
}

TEST_CASE("load vector of f=1 sums to the area") {
    Mesh m = build_lshape(1);
    Eigen::VectorXd b = assemble_load(m, [](const Vec2&) { return 1.0; });
    CHECK_THAT(b.sum(), WithinRel(3.0 / 16.0, 1e-12));
}

TEST_CASE("graded load integration handles an r^{-1} corner singularity") {
    // single triangle (0,0),(1,0),(0,1); int r^{-1} = sqrt(2) ln(1+sqrt 2)
    Mesh m;
    m.nodes = {{0, 0}, {1, 0}, {0, 1}};
    m.tris = {{1, 2, 0}};
    m.generation = {0};
    m.color = {TriColor::Red};
    auto f = [](const Vec2& x) { return 1.0 / norm(x); };
    double val = detail::integrate_on_tri(m, 0, f, Vec2{0.0, 0.0});
    CHECK_THAT(val, WithinRel(std::sqrt(2.0) * std::log(1.0 + std::sqrt(2.0)), 1e-10));
}

TEST_CASE("residual of a linear field vanishes at interior nodes") {
    Mesh m = build_lshape(1);
    MaterialLaw law(3, 1, 1e-5);
    NodalField u(m, interpolate(m, [](const Vec2& x) { return x.x + 3.0 * x.y; }));
    Eigen::VectorXd r = assemble_residual(law, m, u);
    std::vector<int> on_bd(m.num_nodes(), 0);
    for (const auto& e : m.boundary) on_bd[e.a] = on_bd[e.b] = 1;
    for (int i = 0; i < m.num_nodes(); ++i)
        if (!on_bd[i]) CHECK_THAT(r[i], WithinAbs(0.0, 1e-13));
}

TEST_CASE("jacobian matches finite differences of the residual") {
    Mesh m = build_lshape(0);
    MaterialLaw law(3, 0.5, 0.1);
    Rng rng(3);
    Eigen::VectorXd u(m.num_nodes()), d(m.num_nodes());
    for (int i = 0; i < m.num_nodes(); ++i) {
        u[i] = rng.uniform(-1.0, 1.0);
        d[i] = rng.uniform(-1.0, 1.0);
    }
    Eigen::SparseMatrix<double> J = assemble_jacobian(law, m, NodalField(m, u));
    const double h = 1e-6;
    Eigen::VectorXd fd = (assemble_residual(law, m, NodalField(m, u + h * d)) -
                          assemble_residual(law, m, NodalField(m, u - h * d))) /
                         (2.0 * h);
    Eigen::VectorXd jd = J * d;
    CHECK((fd - jd).norm() <= 1e-6 * (1.0 + jd.norm()));
    // symmetry of the linearization
    Eigen::MatrixXd Jd = Eigen::MatrixXd(J);
    CHECK((Jd - Jd.transpose()).norm() <= 1e-12 * Jd.norm());
}

TEST_CASE("errors vanish when the exact solution is the discrete one") {
    Mesh m = build_lshape(1);
    MaterialLaw law(3, 0.5, 1e-5);
    ExactSolution ex;
    ex.value = [](const Vec2& x) { return 0.5 * x.x - x.y + 0.25; };
    ex.grad = [](const Vec2&) { return Vec2{0.5, -1.0}; };
    NodalField u(m, interpolate(m, ex.value));
    auto [semi, full] = w1p_error(m, u, ex, 3.0);
    CHECK_THAT(semi, WithinAbs(0.0, 1e-13));
    CHECK_THAT(full, WithinAbs(0.0, 1e-13));
    CHECK_THAT(quasi_norm_error(law, m, u, ex), WithinAbs(0.0, 1e-13));
}

TEST_CASE("w1p error against a known quadratic") {
    // u_h = 0, exact u = x^2 on the L-shape: |u|_{1,3}^3 = int |2x|^3
    Mesh m = build_lshape(0);
    ExactSolution ex;
    ex.value = [](const Vec2& x) { return x.x * x.x; };
    ex.grad = [](const Vec2& x) { return Vec2{2.0 * x.x, 0.0}; };
    NodalField u(m);
    auto [semi, full] = w1p_error(m, u, ex, 3.0);
    // int_Omega 8|x|^3: strip x in [-1/4,1/4], height 1/2 minus quadrant x>0 height 1/4
    // = 8 * (2 * 1/2 * (1/4)^4/4 - 1/4 * (1/4)^4/4)
    const double semi3 = 8.0 * ((0.5 + 0.25) * std::pow(0.25, 4) / 4.0);
    CHECK_THAT(std::pow(semi, 3.0), WithinRel(semi3, 1e-10));
    CHECK(full > semi);
}

TEST_CASE("discrete quasi-norm dominates the p-seminorm") {
    Mesh m = build_lshape(1);
    MaterialLaw law(3, 1, 0);
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd v(m.num_nodes());
        for (int i = 0; i < m.num_nodes(); ++i) v[i] = rng.uniform(-1.0, 1.0);
        const double q = quasi_norm_discrete(law, m, v, v);
        const double s = w1p_seminorm_discrete(m, v, 3.0);
        CHECK(q * q >= std::pow(s, 3.0) * (1.0 - 1e-12));
    }
}
