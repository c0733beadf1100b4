#pragma once

#include <fstream>

#include "febe/solver.hpp"

namespace febe {

// Area-weighted nodal gradient averaging of a P1 field.
struct RecoveredGradient {
    Eigen::VectorXd gx, gy;  // nodal components

    Vec2 at(const Mesh& mesh, int t, const Vec2& x) const {
        const auto& k = mesh.tris[t];
        const Vec2 a = mesh.nodes[k[0]], b = mesh.nodes[k[1]], c = mesh.nodes[k[2]];
        const double two_area = cross(b - a, c - a);
        const double l0 = cross(b - x, c - x) / two_area;
        const double l1 = cross(c - x, a - x) / two_area;
        const double l2 = 1.0 - l0 - l1;
        return {l0 * gx[k[0]] + l1 * gx[k[1]] + l2 * gx[k[2]],
                l0 * gy[k[0]] + l1 * gy[k[1]] + l2 * gy[k[2]]};
    }
};

inline RecoveredGradient recover_gradient(const Mesh& mesh, const Eigen::VectorXd& u) {
    RecoveredGradient rg;
    rg.gx = Eigen::VectorXd::Zero(mesh.num_nodes());
    rg.gy = Eigen::VectorXd::Zero(mesh.num_nodes());
    Eigen::VectorXd wsum = Eigen::VectorXd::Zero(mesh.num_nodes());
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        const Vec2 gu = detail::field_gradient(mesh, u, t, g);
        for (int i = 0; i < 3; ++i) {
            const int z = mesh.tris[t][i];
            rg.gx[z] += g.area * gu.x;
            rg.gy[z] += g.area * gu.y;
            wsum[z] += g.area;
        }
    }
    rg.gx.array() /= wsum.array();
    rg.gy.array() /= wsum.array();
    return rg;
}

struct EstimateResult {
    std::vector<double> element;   // localized squared indicators, one per triangle
    double eta_gr2 = 0.0;          // gradient recovery
    double eta_f2 = 0.0;           // data oscillation
    double eta_S2 = 0.0;           // single layer consistency
    double eta_bd2 = 0.0;          // boundary flux residual
    double eta_g2_edges = 0.0;     // friction flux, edge-local part
    double eta_g2_global = 0.0;    // friction bound, non-local part

    double eta2() const {
        return eta_gr2 + eta_f2 + eta_S2 + eta_bd2 + eta_g2_edges + eta_g2_global;
    }
    double eta() const { return std::sqrt(eta2()); }
    // everything that is attributed to elements (used by the consistency audit)
    double local2() const { return eta_gr2 + eta_f2 + eta_S2 + eta_bd2 + eta_g2_edges; }
};

// squared gradient recovery indicator per element
inline std::vector<double> eta_gradient_recovery(const MaterialLaw& law, const Mesh& mesh,
                                                 const Eigen::VectorXd& u) {
    const RecoveredGradient rg = recover_gradient(mesh, u);
    std::vector<double> ind(mesh.num_tris(), 0.0);
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        const Vec2 gu = detail::field_gradient(mesh, u, t, g);
        ind[t] = integrate_triangle(
            mesh.nodes[mesh.tris[t][0]], mesh.nodes[mesh.tris[t][1]], mesh.nodes[mesh.tris[t][2]],
            [&](const Vec2& x) { return law.g_pdelta(norm(gu), norm(gu - rg.at(mesh, t, x))); });
    }
    return ind;
}

struct EstimateOptions {
    // use h_K^2 |grad f| instead of h_K (f - f_K) when grad_f is available
    bool oscillation_grad_variant = false;
};

inline EstimateResult estimate_error(const DiscreteSystem& sys, const SolveResult& sol,
                                     const EstimateOptions& eopt = {}) {
    const Mesh& mesh = *sys.mesh;
    const ProblemSpec& prob = *sys.prob;
    const MaterialLaw& law = prob.law;
    EstimateResult est;
    est.element.assign(mesh.num_tris(), 0.0);

    // interior terms
    std::vector<double> gr = eta_gradient_recovery(law, mesh, sol.u);
    for (int t = 0; t < mesh.num_tris(); ++t) {
        est.element[t] += gr[t];
        est.eta_gr2 += gr[t];
    }
    if (prob.f) {
        const bool grad_variant = eopt.oscillation_grad_variant && prob.grad_f;
        for (int t = 0; t < mesh.num_tris(); ++t) {
            auto g = detail::tri_geometry(mesh, t);
            const Vec2 gu = detail::field_gradient(mesh, sol.u, t, g);
            const double a = std::pow(norm(gu), law.p() - 1.0);
            const double hk = mesh.tri_diameter(t);
            // plain element rule on purpose: grading into a corner where f is not
            // p'-integrable would make the oscillation term blow up
            const auto& k = mesh.tris[t];
            const Vec2 va = mesh.nodes[k[0]], vb = mesh.nodes[k[1]], vc = mesh.nodes[k[2]];
            double val;
            if (grad_variant) {
                val = integrate_triangle(va, vb, vc, [&](const Vec2& x) {
                    return g_conj_degenerate(law.p(), a, hk * hk * norm(prob.grad_f(x)));
                });
            } else {
                const double fmean = integrate_triangle(va, vb, vc, prob.f) / g.area;
                val = integrate_triangle(va, vb, vc, [&](const Vec2& x) {
                    return g_conj_degenerate(law.p(), a, hk * (prob.f(x) - fmean));
                });
            }
            est.element[t] += val;
            est.eta_f2 += val;
        }
    }

    // boundary terms at Gauss points of each boundary edge
    const BoundaryCurve& cv = sys.curve;
    Eigen::VectorXd z = sol.w - sys.U0;  // boundary trace minus datum, P1
    const auto& rule = line_rule(4);
    for (int e = 0; e < cv.n(); ++e) {
        const double L = cv.len(e);
        const Vec2 nu = cv.normal(e);
        const int t = cv.tri[e];
        auto g = detail::tri_geometry(mesh, t);
        const Vec2 gu = detail::field_gradient(mesh, sol.u, t, g);
        const double conormal = law.rho(norm(gu)) * dot(gu, nu);
        const double z_slope = (z[(e + 1) % cv.n()] - z[e]) / L;

        double rS2 = 0.0, rB2 = 0.0;
        for (std::size_t qi = 0; qi < rule.points.size(); ++qi) {
            // nudge away from the edge endpoints where the kernels blow up
            const double s0 = std::clamp(rule.points[qi] * L, 1e-12 * L, (1.0 - 1e-12) * L);
            const Vec2 x = cv.point(e, s0 / L);
            const double rS = eval_single_layer_ds(cv, sol.flux, e, s0) + z_slope -
                              eval_double_layer_ds(cv, z, e, s0);
            const double rB = -conormal + prob.t0(x, nu) - eval_hypersingular(cv, z, e, s0) -
                              eval_adjoint_double_layer(cv, sol.flux, x, nu, e) + sol.flux[e];
            rS2 += rule.weights[qi] * rS * rS;
            rB2 += rule.weights[qi] * rB * rB;
        }
        const double etaS = L * L * rS2;   // l * ||r||_{L2(l)}^2
        const double etaB = L * L * rB2;
        est.eta_S2 += etaS;
        est.eta_bd2 += etaB;
        est.element[t] += etaS + etaB;
        if (cv.label[e] == BoundaryLabel::GammaS) {
            const double etag = L * L * conormal * conormal;
            est.eta_g2_edges += etag;
            est.element[t] += etag;
        }
    }

    // non-local friction contribution ||g||^2 over the friction boundary
    if (prob.g != 0.0) {
        for (int e = 0; e < cv.n(); ++e)
            if (cv.label[e] == BoundaryLabel::GammaS)
                est.eta_g2_global += cv.len(e) * prob.g * prob.g;
    }
    return est;
}

inline void dump_indicators(const EstimateResult& est, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("dump_indicators: cannot open " + path);
    os.precision(10);
    os << "element,indicator_sq\n";
    for (std::size_t t = 0; t < est.element.size(); ++t) os << t << "," << est.element[t] << "\n";
}

}  // namespace febe
