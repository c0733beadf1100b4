#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "febe/mesh.hpp"
#include "febe/quadrature.hpp"

namespace febe {

// Closed polygonal boundary in CCW order; node i starts edge i.
struct BoundaryCurve {
    std::vector<Vec2> pos;              // boundary nodes in loop order
    std::vector<int> mesh_node;         // originating mesh node (-1 if synthetic)
    std::vector<BoundaryLabel> label;   // per edge
    std::vector<int> tri;               // adjacent triangle per edge (-1 if none)

    int n() const { return static_cast<int>(pos.size()); }
    const Vec2& a(int e) const { return pos[e]; }
    const Vec2& b(int e) const { return pos[(e + 1) % n()]; }
    double len(int e) const { return dist(a(e), b(e)); }
    Vec2 tangent(int e) const { return (1.0 / len(e)) * (b(e) - a(e)); }
    Vec2 normal(int e) const { return outward_normal(tangent(e)); }
    Vec2 point(int e, double s) const { return a(e) + s * (b(e) - a(e)); }

    double diameter() const {
        double d = 0.0;
        for (int i = 0; i < n(); ++i)
            for (int j = i + 1; j < n(); ++j) d = std::max(d, dist(pos[i], pos[j]));
        return d;
    }
};

inline BoundaryCurve boundary_curve(const Mesh& mesh) {
    BoundaryCurve c;
    for (const auto& e : mesh.boundary) {
        c.pos.push_back(mesh.nodes[e.a]);
        c.mesh_node.push_back(e.a);
        c.label.push_back(e.label);
        c.tri.push_back(e.tri);
    }
    return c;
}

inline BoundaryCurve make_circle(double radius, int n_edges) {
    BoundaryCurve c;
    for (int i = 0; i < n_edges; ++i) {
        double th = 2.0 * M_PI * i / n_edges;
        c.pos.push_back({radius * std::cos(th), radius * std::sin(th)});
        c.mesh_node.push_back(-1);
        c.label.push_back(BoundaryLabel::GammaT);
        c.tri.push_back(-1);
    }
    return c;
}

// 1 if the logarithmic capacity bound holds (diameter < 1 as a sufficient
// proxy), otherwise the scale that brings the diameter to 1/2.
inline double check_capacity_scale(const BoundaryCurve& curve) {
    const double d = curve.diameter();
    return d < 1.0 ? 1.0 : 0.5 / d;
}

namespace bemdetail {

// Closed-form segment integrals for a straight source segment a -> a + L*dhat
// and an off-segment evaluation point x.  With u0 = a - x, beta = u0.dhat,
// c = u0.nu and D(t) = (t+beta)^2 + c^2:
//   Ilog = int_0^L ln|x - x'(t)| dt
//   I0, I1   = int t^n / D dt
//   H0,H1,H2 = int t^n / D^2 dt
struct SegInt {
    double L = 0.0;
    Vec2 dhat, nu;
    double beta = 0.0, c = 0.0;

    SegInt(const Vec2& a, const Vec2& b, const Vec2& x) {
        L = dist(a, b);
        dhat = (1.0 / L) * (b - a);
        nu = outward_normal(dhat);
        const Vec2 u0 = a - x;
        beta = dot(u0, dhat);
        c = dot(u0, nu);
    }

    bool collinear() const { return std::abs(c) < 1e-14 * (L + std::abs(beta)); }

    double ilog() const {
        const double s1 = beta, s2 = beta + L, g = std::abs(c);
        auto F = [&](double s) {
            const double D = s * s + g * g;
            if (D == 0.0) return 0.0;
            double v = 0.5 * s * std::log(D) - s;
            if (g > 0.0) v += g * std::atan(s / g);
            return v;
        };
        return F(s2) - F(s1);
    }

    // n = 0,1 moments of 1/D in the parameter t
    void inv_d(double& i0, double& i1) const {
        const double s1 = beta, s2 = beta + L, g = std::abs(c);
        double i0s, i1s;
        if (g > 1e-14 * (L + std::abs(beta))) {
            i0s = (std::atan(s2 / g) - std::atan(s1 / g)) / g;
        } else {
            i0s = 1.0 / s1 - 1.0 / s2;  // valid when [s1,s2] excludes 0
        }
        i1s = 0.5 * std::log((s2 * s2 + g * g) / (s1 * s1 + g * g));
        i0 = i0s;
        i1 = i1s - beta * i0s;
    }

    // n = 0,1,2 moments of 1/D^2 in t
    void inv_d2(double& h0, double& h1, double& h2) const {
        const double s1 = beta, s2 = beta + L, g = std::abs(c);
        const double D1 = s1 * s1 + g * g, D2 = s2 * s2 + g * g;
        double h0s, hs1, hs2, i0s;
        if (g > 1e-14 * (L + std::abs(beta))) {
            h0s = 0.5 * (s2 / D2 - s1 / D1) / (g * g) +
                  0.5 * (std::atan(s2 / g) - std::atan(s1 / g)) / (g * g * g);
            i0s = (std::atan(s2 / g) - std::atan(s1 / g)) / g;
        } else {
            h0s = (1.0 / (s1 * s1 * s1) - 1.0 / (s2 * s2 * s2)) / 3.0;
            i0s = 1.0 / s1 - 1.0 / s2;
        }
        hs1 = 0.5 * (1.0 / D1 - 1.0 / D2);
        hs2 = i0s - g * g * h0s;
        h0 = h0s;
        h1 = hs1 - beta * h0s;
        h2 = hs2 - 2.0 * beta * hs1 + beta * beta * h0s;
    }
};

inline const LineRule& outer_rule() { return line_rule(8); }

// Outer integration points over edge l; graded towards endpoints shared with
// the source edge m when the two are adjacent.
inline void outer_points(const BoundaryCurve& cv, int l, int m,
                         std::vector<double>& s, std::vector<double>& w) {
    s.clear();
    w.clear();
    const auto& g = outer_rule();
    const bool share_a = dist(cv.a(l), cv.b(m)) < 1e-14 || dist(cv.a(l), cv.a(m)) < 1e-14;
    const bool share_b = dist(cv.b(l), cv.a(m)) < 1e-14 || dist(cv.b(l), cv.b(m)) < 1e-14;
    if (l == m || (!share_a && !share_b)) {
        for (std::size_t q = 0; q < g.points.size(); ++q) {
            s.push_back(g.points[q]);
            w.push_back(g.weights[q]);
        }
        return;
    }
    // geometric grading towards the shared endpoint
    const int levels = 16;
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k <= levels; ++k) {
        lo = (k == levels) ? 0.0 : hi * 0.5;
        for (std::size_t q = 0; q < g.points.size(); ++q) {
            double t = lo + g.points[q] * (hi - lo);
            double wt = g.weights[q] * (hi - lo);
            s.push_back(share_a ? t : 1.0 - t);
            w.push_back(wt);
        }
        hi = lo;
    }
}

}  // namespace bemdetail

// Galerkin matrices of the layer potentials with the -1/pi log kernel
// (twice the -1/2pi convention; the 1/2 in the Steklov-Poincare operator
// compensates).  P0 space: one dof per edge.  P1 space: one dof per node.
struct BemMatrices {
    Eigen::MatrixXd V;    // P0 x P0 single layer
    Eigen::MatrixXd K;    // P0 test x P1 trial double layer
    Eigen::MatrixXd W;    // P1 x P1 hypersingular (via V and arclength derivatives)
    Eigen::MatrixXd M0;   // P0 x P1 mass pairing
    Eigen::MatrixXd Ds;   // P0 x P1 arclength derivative of P1 functions
    double scale = 1.0;
    Eigen::LLT<Eigen::MatrixXd> V_llt;
};

inline BemMatrices assemble_layer_potentials(const BoundaryCurve& curve, double scale = 1.0) {
    const int n = curve.n();
    BoundaryCurve cv = curve;
    if (scale != 1.0)
        for (auto& p : cv.pos) p = scale * p;
    for (int e = 0; e < n; ++e)
        if (cv.len(e) < 1e-15) throw std::runtime_error("bem: degenerate boundary edge");

    BemMatrices bm;
    bm.scale = scale;
    bm.V.setZero(n, n);
    bm.K.setZero(n, n);
    bm.M0.setZero(n, n);
    bm.Ds.setZero(n, n);

    std::vector<double> os, ow;
    for (int l = 0; l < n; ++l) {
        const double Ll = cv.len(l);
        for (int m = 0; m < n; ++m) {
            if (m == l) {
                bm.V(l, l) = (1.0 / M_PI) * Ll * Ll * (1.5 - std::log(Ll));
                continue;  // double layer vanishes on the own straight edge
            }
            bemdetail::outer_points(cv, l, m, os, ow);
            double v = 0.0, ka = 0.0, kb = 0.0;
            const double Lm = cv.len(m);
            for (std::size_t q = 0; q < os.size(); ++q) {
                const Vec2 x = cv.point(l, os[q]);
                bemdetail::SegInt si(cv.a(m), cv.b(m), x);
                v += ow[q] * si.ilog();
                if (!si.collinear()) {
                    double i0, i1;
                    si.inv_d(i0, i1);
                    // P1 weights (1 - t/L) and t/L against the kernel c/D
                    ka += ow[q] * si.c * (i0 - i1 / Lm);
                    kb += ow[q] * si.c * (i1 / Lm);
                }
            }
            bm.V(l, m) = -(1.0 / M_PI) * Ll * v;
            bm.K(l, m) += -(1.0 / M_PI) * Ll * ka;
            bm.K(l, (m + 1) % n) += -(1.0 / M_PI) * Ll * kb;
        }
        bm.M0(l, l) += 0.5 * Ll;
        bm.M0(l, (l + 1) % n) += 0.5 * Ll;
        bm.Ds(l, l) = -1.0 / Ll;
        bm.Ds(l, (l + 1) % n) = 1.0 / Ll;
    }
    bm.V = 0.5 * (bm.V + bm.V.transpose()).eval();
    bm.W = bm.Ds.transpose() * bm.V * bm.Ds;
    bm.W = 0.5 * (bm.W + bm.W.transpose()).eval();
    bm.V_llt.compute(bm.V);
    if (bm.V_llt.info() != Eigen::Success)
        throw std::runtime_error("bem: single layer not SPD; check capacity scaling");
    return bm;
}

// S_h = 1/2 (W + (M0 - K)^T V^{-1} (M0 - K)), SPD on the boundary P1 space.
inline Eigen::MatrixXd assemble_steklov_poincare(const BemMatrices& bm) {
    const Eigen::MatrixXd B = bm.M0 - bm.K;
    Eigen::MatrixXd S = 0.5 * (bm.W + B.transpose() * bm.V_llt.solve(B));
    return 0.5 * (S + S.transpose());
}

// phi = V^{-1} (M0 - K)(u0 - w) for the boundary trace w and Dirichlet data
// interpolant u0 (P1 coefficient vectors in boundary node order).
inline Eigen::VectorXd recover_flux(const BemMatrices& bm, const Eigen::VectorXd& w,
                                    const Eigen::VectorXd& u0) {
    return bm.V_llt.solve((bm.M0 - bm.K) * (u0 - w));
}

// P1 boundary mass matrix (used by tests and norms).
inline Eigen::MatrixXd boundary_mass_p1(const BoundaryCurve& cv) {
    const int n = cv.n();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int e = 0; e < n; ++e) {
        const double L = cv.len(e);
        const int a = e, b = (e + 1) % n;
        M(a, a) += L / 3.0;
        M(b, b) += L / 3.0;
        M(a, b) += L / 6.0;
        M(b, a) += L / 6.0;
    }
    return M;
}

// ---- pointwise potential evaluation on the boundary (estimator support) ----

// x sits on edge `self` at arclength parameter s0 in (0, len).  Densities are
// given in boundary dof order: phi per edge (P0), w per node (P1).

inline double eval_single_layer(const BoundaryCurve& cv, const Eigen::VectorXd& phi,
                                const Vec2& x) {
    double sum = 0.0;
    for (int m = 0; m < cv.n(); ++m) {
        bemdetail::SegInt si(cv.a(m), cv.b(m), x);
        sum += phi[m] * si.ilog();
    }
    return -(1.0 / M_PI) * sum;
}

// tangential derivative of the single layer potential; PV on the own edge
inline double eval_single_layer_ds(const BoundaryCurve& cv, const Eigen::VectorXd& phi,
                                   int self, double s0) {
    const Vec2 x = cv.point(self, s0 / cv.len(self));
    const Vec2 tau = cv.tangent(self);
    double sum = 0.0;
    for (int m = 0; m < cv.n(); ++m) {
        const double Lm = cv.len(m);
        if (m == self) {
            sum += phi[m] * std::log(s0 / (Lm - s0));
            continue;
        }
        bemdetail::SegInt si(cv.a(m), cv.b(m), x);
        double i0, i1;
        si.inv_d(i0, i1);
        // int (x - x').tau / D dt  with  x' - x = u0 + t dhat
        const double u0tau = dot(cv.a(m) - x, tau);
        const double dtau = dot(si.dhat, tau);
        sum += phi[m] * (-(u0tau * i0 + dtau * i1));
    }
    return -(1.0 / M_PI) * sum;
}

inline double eval_double_layer(const BoundaryCurve& cv, const Eigen::VectorXd& w,
                                const Vec2& x, int skip_edge = -1) {
    double sum = 0.0;
    for (int m = 0; m < cv.n(); ++m) {
        if (m == skip_edge) continue;
        bemdetail::SegInt si(cv.a(m), cv.b(m), x);
        if (si.collinear()) continue;
        const double Lm = cv.len(m);
        double i0, i1;
        si.inv_d(i0, i1);
        const double wa = w[m], wb = w[(m + 1) % cv.n()];
        sum += si.c * (wa * (i0 - i1 / Lm) + wb * i1 / Lm);
    }
    return -(1.0 / M_PI) * sum;
}

// tangential derivative of the double layer potential of a P1 density
inline double eval_double_layer_ds(const BoundaryCurve& cv, const Eigen::VectorXd& w,
                                   int self, double s0) {
    const Vec2 x = cv.point(self, s0 / cv.len(self));
    const Vec2 tau = cv.tangent(self);
    double sum = 0.0;
    for (int m = 0; m < cv.n(); ++m) {
        if (m == self) continue;  // own straight edge contributes nothing
        bemdetail::SegInt si(cv.a(m), cv.b(m), x);
        const double taunu = dot(tau, si.nu);
        const double Lm = cv.len(m);
        const double wa = w[m], wb = w[(m + 1) % cv.n()];
        double i0, i1;
        si.inv_d(i0, i1);
        double part = 0.0;
        if (taunu != 0.0) {
            part -= taunu * (wa * (i0 - i1 / Lm) + wb * i1 / Lm);
        }
        if (!si.collinear()) {
            double h0, h1, h2;
            si.inv_d2(h0, h1, h2);
            const double u0tau = dot(cv.a(m) - x, tau);
            const double dtau = dot(si.dhat, tau);
            // phi(t) (A.tau) = (wa + (wb-wa) t/L)(u0tau + t dtau), A = x' - x
            const double q0 = wa * u0tau;
            const double q1 = wa * dtau + (wb - wa) / Lm * u0tau;
            const double q2 = (wb - wa) / Lm * dtau;
            part += 2.0 * si.c * (q0 * h0 + q1 * h1 + q2 * h2);
        }
        sum += part;
    }
    return -(1.0 / M_PI) * sum;
}

// adjoint double layer potential of a P0 density at x with normal nu_x
inline double eval_adjoint_double_layer(const BoundaryCurve& cv, const Eigen::VectorXd& phi,
                                        const Vec2& x, const Vec2& nu_x, int skip_edge = -1) {
    double sum = 0.0;
    for (int m = 0; m < cv.n(); ++m) {
        if (m == skip_edge) continue;
        bemdetail::SegInt si(cv.a(m), cv.b(m), x);
        double i0, i1;
        si.inv_d(i0, i1);
        // int (x - x').nu_x / D dt
        const double u0n = dot(cv.a(m) - x, nu_x);
        const double dn = dot(si.dhat, nu_x);
        if (si.collinear() && std::abs(u0n) + std::abs(dn) < 1e-13) continue;
        sum += phi[m] * (-(u0n * i0 + dn * i1));
    }
    return -(1.0 / M_PI) * sum;
}

// hypersingular operator applied to a P1 density, via W = -d/ds V d/ds
inline double eval_hypersingular(const BoundaryCurve& cv, const Eigen::VectorXd& w,
                                 int self, double s0) {
    Eigen::VectorXd slope(cv.n());
    for (int e = 0; e < cv.n(); ++e)
        slope[e] = (w[(e + 1) % cv.n()] - w[e]) / cv.len(e);
    return -eval_single_layer_ds(cv, slope, self, s0);
}

}  // namespace febe
