#include <catch2/catch_amalgamated.hpp>

#include "febe/solver.hpp"

using namespace febe;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// linear interior solution, zero exterior: all coupling residuals vanish
ProblemSpec linear_patch_spec() {
    ProblemSpec ps{MaterialLaw(2, 0.5, 0.0)};
    ps.g = 0.0;
    ps.u0 = [](const Vec2& x) { return 0.3 * x.x - 0.7 * x.y + 0.1; };
    ps.t0 = [](const Vec2&, const Vec2& nu) { return dot(Vec2{0.3, -0.7}, nu); };
    ps.exact.value = ps.u0;
    ps.exact.grad = [](const Vec2&) { return Vec2{0.3, -0.7}; };
    ps.has_exact = true;
    return ps;
}

Mesh all_gamma_t(Mesh m) {
    for (auto& e : m.boundary) e.label = BoundaryLabel::GammaT;
    return m;
}

}  // namespace

TEST_CASE("multiplier projection clamps componentwise") {
    Eigen::VectorXd s(4);
    s << -3.0, -0.2, 0.9, 7.5;
    Eigen::VectorXd p = project_multiplier(s);
    CHECK(p[0] == -1.0);
    CHECK(p[1] == -0.2);
    CHECK(p[2] == 0.9);
    CHECK(p[3] == 1.0);
}

TEST_CASE("patch test: linear solution is reproduced exactly for p=2") {
    Mesh m = all_gamma_t(build_lshape(1));
    ProblemSpec ps = linear_patch_spec();
    DiscreteSystem sys = build_system(m, ps);
    CHECK(sys.n_slip() == 0);
    SolveResult sol = solve_coupled(sys);
    CHECK(sol.converged);
    double err = 0.0;
    for (int i = 0; i < m.num_nodes(); ++i)
        err = std::max(err, std::abs(sol.u[i] - ps.exact.value(m.nodes[i])));
    CHECK(err <= 1e-10);
    CHECK(sol.v.size() == 0);
    NodalField uh(m, sol.u);
    CHECK(w1p_error(m, uh, ps.exact, 2.0).second <= 1e-10);
}

TEST_CASE("coupled jacobian matches finite differences") {
    Mesh m = build_lshape(0);
    ProblemSpec ps = example1_spec(3.0, 0.1);  // milder regularization for FD
    DiscreteSystem sys = build_system(m, ps);
    Rng rng(23);
    Eigen::VectorXd u(sys.n_nodes()), v(sys.n_slip()), d(sys.dof());
    for (int i = 0; i < u.size(); ++i) u[i] = 0.3 * rng.uniform(-1.0, 1.0);
    for (int i = 0; i < v.size(); ++i) v[i] = 0.3 * rng.uniform(-1.0, 1.0);
    for (int i = 0; i < d.size(); ++i) d[i] = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd c_sigma = Eigen::VectorXd::Zero(sys.n_slip());
    const double h = 1e-6;
    Eigen::VectorXd up = u + h * d.head(u.size()), um = u - h * d.head(u.size());
    Eigen::VectorXd vp = v + h * d.tail(v.size()), vm = v - h * d.tail(v.size());
    Eigen::VectorXd fd = (solvedetail::coupled_residual(sys, up, vp, c_sigma) -
                          solvedetail::coupled_residual(sys, um, vm, c_sigma)) /
                         (2.0 * h);
    Eigen::VectorXd jd = solvedetail::coupled_jacobian(sys, u) * d;
    CHECK((fd - jd).norm() <= 1e-5 * (1.0 + jd.norm()));
}

TEST_CASE("frictionless solve is a single inner iteration") {
    ProblemSpec ps = example2_spec();
    Mesh m = initial_mesh(ps, 1);
    DiscreteSystem sys = build_system(m, ps);
    CHECK(sys.n_slip() == 0);
    SolveResult sol = solve_coupled(sys);
    CHECK(sol.converged);
    CHECK(sol.uzawa_its == 1);
    CHECK(sol.newton_worst <= 30);
    NodalField uh(m, sol.u);
    double err = w1p_error(m, uh, ps.exact, 3.0, ps.singular).second;
    CHECK(err < 0.2);
}

TEST_CASE("manufactured solution error decreases under refinement") {
    ProblemSpec ps = example2_spec();
    Mesh m = initial_mesh(ps);
    double prev = 0.0;
    for (int level = 0; level < 2; ++level) {
        DiscreteSystem sys = build_system(m, ps);
        SolveResult sol = solve_coupled(sys);
        NodalField uh(m, sol.u);
        double err = w1p_error(m, uh, ps.exact, 3.0, ps.singular).second;
        if (level) CHECK(err < prev);
        prev = err;
        m = refine_uniform(m);
    }
}

TEST_CASE("friction solve: multiplier feasible and energy finite") {
    Mesh m = build_lshape(1);
    ProblemSpec ps = example1_spec();
    DiscreteSystem sys = build_system(m, ps);
    SolveResult sol = solve_coupled(sys);
    CHECK(sol.converged);
    CHECK(sol.sigma.lpNorm<Eigen::Infinity>() <= 1.0 + 1e-14);
    CHECK(sol.uzawa_its <= 5);
    CHECK(std::isfinite(sol.energy_J));
    CHECK(sys.dof() == 80);  // expected dof count at this level
}

TEST_CASE("iterative linear backend agrees with the direct one") {
    ProblemSpec ps = example2_spec();
    Mesh m = initial_mesh(ps, 1);
    DiscreteSystem sys = build_system(m, ps);
    SolveOptions it_opt;
    it_opt.linear_backend = LinearBackend::Iterative;
    SolveResult a = solve_coupled(sys);
    SolveResult b = solve_coupled(sys, it_opt);
    CHECK((a.u - b.u).lpNorm<Eigen::Infinity>() <= 1e-7 * (1.0 + a.u.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("data compatibility of the manufactured problem") {
    ProblemSpec ps = example2_spec();
    Mesh m = initial_mesh(ps, 1);
    DiscreteSystem sys = build_system(m, ps);
    // divergence theorem: int_Omega f + <t0, 1> = 0
    CHECK_THAT(sys.b_f.sum() + sys.b_t0.sum(), WithinAbs(0.0, 1e-6));
}
