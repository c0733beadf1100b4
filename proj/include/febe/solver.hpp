#pragma once

#include <chrono>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "febe/bem.hpp"
#include "febe/fem.hpp"
#include "febe/problems.hpp"

namespace febe {

enum class LinearBackend { Direct, Iterative };

struct SolveOptions {
    double newton_tol = 1e-10;
    int max_newton = 50;
    int max_line_search = 10;
    double uzawa_tol = 1e-10;
    int max_uzawa = 500;
    LinearBackend linear_backend = LinearBackend::Direct;
};

// Mesh-dependent discrete operators of the coupled problem.  Boundary dofs
// are indexed by the boundary loop; slip dofs by the nodes strictly inside
// the friction part of the boundary.
struct DiscreteSystem {
    const Mesh* mesh = nullptr;
    const ProblemSpec* prob = nullptr;
    BoundaryCurve curve;
    Eigen::MatrixXd S;              // Steklov-Poincare on boundary P1 dofs
    BemMatrices bem;
    std::vector<int> bnode;         // boundary dof -> mesh node
    std::vector<int> node_to_b;     // mesh node -> boundary dof or -1
    std::vector<int> slip_node;     // slip dof -> mesh node
    std::vector<int> slip_b;        // slip dof -> boundary dof
    Eigen::VectorXd b_f;            // volume load (mesh nodes)
    Eigen::VectorXd b_t0;           // flux load (boundary dofs)
    Eigen::VectorXd U0;             // boundary datum interpolant (boundary dofs)
    Eigen::VectorXd q;              // b_t0 + S U0
    Eigen::MatrixXd slip_mass;      // P1 mass on the friction boundary (slip dofs)

    int n_nodes() const { return mesh->num_nodes(); }
    int n_bdofs() const { return static_cast<int>(bnode.size()); }
    int n_slip() const { return static_cast<int>(slip_node.size()); }
    int dof() const { return n_nodes() + n_slip(); }

    // boundary trace w = T u + E v
    Eigen::VectorXd trace(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
        Eigen::VectorXd w(n_bdofs());
        for (int b = 0; b < n_bdofs(); ++b) w[b] = u[bnode[b]];
        for (int s = 0; s < n_slip(); ++s) w[slip_b[s]] += v[s];
        return w;
    }
};

inline DiscreteSystem build_system(const Mesh& mesh, const ProblemSpec& prob) {
    DiscreteSystem sys;
    sys.mesh = &mesh;
    sys.prob = &prob;
    sys.curve = boundary_curve(mesh);
    const double scale = check_capacity_scale(sys.curve);
    sys.bem = assemble_layer_potentials(sys.curve, scale);
    sys.S = assemble_steklov_poincare(sys.bem);

    sys.bnode = mesh.boundary_loop();
    sys.node_to_b.assign(mesh.num_nodes(), -1);
    for (int b = 0; b < sys.n_bdofs(); ++b) sys.node_to_b[sys.bnode[b]] = b;

    // slip dofs: boundary nodes touching only friction edges
    std::vector<int> on_gs(mesh.num_nodes(), 0), on_gt(mesh.num_nodes(), 0);
    for (const auto& e : mesh.boundary) {
        auto& tab = e.label == BoundaryLabel::GammaS ? on_gs : on_gt;
        tab[e.a] = tab[e.b] = 1;
    }
    for (int b = 0; b < sys.n_bdofs(); ++b) {
        int n = sys.bnode[b];
        if (on_gs[n] && !on_gt[n]) {
            sys.slip_node.push_back(n);
            sys.slip_b.push_back(b);
        }
    }

    if (prob.f) {
        sys.b_f = assemble_load(mesh, prob.f, prob.singular);
    } else {
        sys.b_f = Eigen::VectorXd::Zero(mesh.num_nodes());
    }

    // b_t0 and U0 on boundary dofs
    sys.b_t0 = Eigen::VectorXd::Zero(sys.n_bdofs());
    const int nb = sys.n_bdofs();
    for (int e = 0; e < nb; ++e) {
        const Vec2 a = sys.curve.a(e), b = sys.curve.b(e);
        const Vec2 nu = sys.curve.normal(e);
        for (int loc = 0; loc < 2; ++loc) {
            auto hat = [&](const Vec2& x) {
                double s = dist(x, a) / dist(b, a);
                return loc == 0 ? 1.0 - s : s;
            };
            auto f = [&](const Vec2& x) { return prob.t0(x, nu) * hat(x); };
            double val;
            if (prob.singular && dist(a, *prob.singular) < 1e-13)
                val = integrate_segment_graded(a, b, f, 60);
            else if (prob.singular && dist(b, *prob.singular) < 1e-13)
                val = integrate_segment_graded(b, a, f, 60);
            else
                val = integrate_segment(a, b, f);
            sys.b_t0[(e + loc) % nb] += val;
        }
    }
    sys.U0.resize(nb);
    for (int b = 0; b < nb; ++b) sys.U0[b] = prob.u0(sys.curve.pos[b]);
    sys.q = sys.b_t0 + sys.S * sys.U0;

    // friction-boundary mass restricted to slip dofs (zero extension at ends)
    std::vector<int> node_to_slip(mesh.num_nodes(), -1);
    for (int s = 0; s < sys.n_slip(); ++s) node_to_slip[sys.slip_node[s]] = s;
    sys.slip_mass.setZero(sys.n_slip(), sys.n_slip());
    for (const auto& e : mesh.boundary) {
        if (e.label != BoundaryLabel::GammaS) continue;
        const double L = dist(mesh.nodes[e.a], mesh.nodes[e.b]);
        const int sa = node_to_slip[e.a], sb = node_to_slip[e.b];
        if (sa >= 0) sys.slip_mass(sa, sa) += L / 3.0;
        if (sb >= 0) sys.slip_mass(sb, sb) += L / 3.0;
        if (sa >= 0 && sb >= 0) {
            sys.slip_mass(sa, sb) += L / 6.0;
            sys.slip_mass(sb, sa) += L / 6.0;
        }
    }
    return sys;
}

struct SolveResult {
    Eigen::VectorXd u;        // mesh nodes
    Eigen::VectorXd v;        // slip dofs
    Eigen::VectorXd sigma;    // slip dofs, |sigma| <= 1
    Eigen::VectorXd w;        // boundary trace T u + E v
    Eigen::VectorXd flux;     // recovered exterior flux, one value per boundary edge
    int newton_its = 0;       // total over all inner solves
    int newton_worst = 0;     // largest single inner solve
    int uzawa_its = 0;        // inner solves performed
    bool converged = false;
    double energy_J = 0.0;
    double solve_seconds = 0.0;
};

inline Eigen::VectorXd project_multiplier(const Eigen::VectorXd& s) {
    return s.cwiseMax(-1.0).cwiseMin(1.0);
}

namespace solvedetail {

inline Eigen::VectorXd coupled_residual(const DiscreteSystem& sys, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& v, const Eigen::VectorXd& c_sigma) {
    const Eigen::VectorXd w = sys.trace(u, v);
    const Eigen::VectorXd s = sys.S * w - sys.q;
    Eigen::VectorXd r(sys.dof());
    r.head(sys.n_nodes()) = assemble_residual(sys.prob->law, *sys.mesh, NodalField(*sys.mesh, u)) - sys.b_f;
    for (int b = 0; b < sys.n_bdofs(); ++b) r[sys.bnode[b]] += s[b];
    for (int k = 0; k < sys.n_slip(); ++k)
        r[sys.n_nodes() + k] = s[sys.slip_b[k]] + c_sigma[k];
    return r;
}

inline Eigen::SparseMatrix<double> coupled_jacobian(const DiscreteSystem& sys,
                                                    const Eigen::VectorXd& u) {
    const int N = sys.n_nodes(), M = sys.n_slip();
    Eigen::SparseMatrix<double> A =
        assemble_jacobian(sys.prob->law, *sys.mesh, NodalField(*sys.mesh, u));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(A.nonZeros() + (sys.n_bdofs() + M) * (sys.n_bdofs() + M));
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    // S coupling blocks; rows/cols are boundary or slip images of boundary dofs
    std::vector<std::pair<int, int>> img;  // (global index, boundary dof)
    for (int b = 0; b < sys.n_bdofs(); ++b) img.push_back({sys.bnode[b], b});
    for (int k = 0; k < M; ++k) img.push_back({N + k, sys.slip_b[k]});
    for (const auto& [gi, bi] : img)
        for (const auto& [gj, bj] : img) trip.emplace_back(gi, gj, sys.S(bi, bj));
    Eigen::SparseMatrix<double> J(N + M, N + M);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

inline Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& J,
                                    const Eigen::VectorXd& r, LinearBackend backend) {
    if (backend == LinearBackend::Direct) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(J);
        if (ldlt.info() != Eigen::Success) throw std::runtime_error("linear_solve: factorization failed");
        return ldlt.solve(r);
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-13);
    cg.setMaxIterations(20 * J.rows());
    cg.compute(J);
    Eigen::VectorXd x = cg.solve(r);
    if (cg.info() != Eigen::Success) throw std::runtime_error("linear_solve: CG stalled");
    return x;
}

// Newton with backtracking on the residual norm; u, v updated in place.
inline int newton_inner(const DiscreteSystem& sys, Eigen::VectorXd& u, Eigen::VectorXd& v,
                        const Eigen::VectorXd& c_sigma, const SolveOptions& opt) {
    const int N = sys.n_nodes(), M = sys.n_slip();
    Eigen::VectorXd r = coupled_residual(sys, u, v, c_sigma);
    double rn = r.norm();
    const double tol = opt.newton_tol * std::max(1.0, sys.q.norm() + sys.b_f.norm());
    int it = 0;
    while (rn > tol && it < opt.max_newton) {
        Eigen::SparseMatrix<double> J = coupled_jacobian(sys, u);
        Eigen::VectorXd d = linear_solve(J, r, opt.linear_backend);
        double alpha = 1.0;
        for (int ls = 0; ls <= opt.max_line_search; ++ls) {
            Eigen::VectorXd ut = u - alpha * d.head(N);
            Eigen::VectorXd vt = M ? (v - alpha * d.tail(M)).eval() : v;
            Eigen::VectorXd rt = coupled_residual(sys, ut, vt, c_sigma);
            if (rt.norm() < (1.0 - 1e-4 * alpha) * rn || ls == opt.max_line_search) {
                u = ut;
                v = vt;
                r = rt;
                rn = rt.norm();
                break;
            }
            alpha *= 0.5;
        }
        ++it;
    }
    return it;
}

}  // namespace solvedetail

// J(u,v) = G(u) + 1/2 <S w, w> - <q, w> - <b_f, u>, w = u|_Gamma + v
inline double compute_energy_J(const DiscreteSystem& sys, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& v) {
    const Eigen::VectorXd w = sys.trace(u, v);
    return assemble_energy(sys.prob->law, *sys.mesh, NodalField(*sys.mesh, u)) +
           0.5 * w.dot(sys.S * w) - sys.q.dot(w) - sys.b_f.dot(u);
}

// Uzawa iteration over the friction multiplier with a Newton solve of the
// nonlinear coupled problem in every step.  Without slip dofs this reduces to
// a single Newton solve.
inline SolveResult solve_coupled(const DiscreteSystem& sys, const SolveOptions& opt = {}) {
    const auto tic = std::chrono::steady_clock::now();
    const int N = sys.n_nodes(), M = sys.n_slip();
    SolveResult res;
    res.u = Eigen::VectorXd::Zero(N);
    res.v = Eigen::VectorXd::Zero(M);
    res.sigma = Eigen::VectorXd::Zero(M);
    const double g = sys.prob->g;

    for (int n = 0; n < std::max(1, opt.max_uzawa); ++n) {
        Eigen::VectorXd c_sigma = M ? (g * (sys.slip_mass * res.sigma)).eval()
                                    : Eigen::VectorXd::Zero(0);
        int its = solvedetail::newton_inner(sys, res.u, res.v, c_sigma, opt);
        res.newton_its += its;
        res.newton_worst = std::max(res.newton_worst, its);
        ++res.uzawa_its;
        if (M == 0) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd next = project_multiplier(res.sigma + sys.prob->uzawa_rho * g * res.v);
        const double change = (next - res.sigma).lpNorm<Eigen::Infinity>();
        res.sigma = next;
        if (change <= opt.uzawa_tol) {
            res.converged = true;
            break;
        }
    }

    res.w = sys.trace(res.u, res.v);
    // flux recovery happens on the scaled curve; V^{-1} scales like 1/length,
    // M0 - K is scale invariant, so the physical flux gains a factor `scale`.
    res.flux = sys.bem.scale * recover_flux(sys.bem, res.w, sys.U0);
    res.energy_J = compute_energy_J(sys, res.u, res.v);
    res.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    return res;
}

}  // namespace febe
