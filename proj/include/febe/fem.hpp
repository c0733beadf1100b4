#pragma once

#include <optional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "febe/material.hpp"
#include "febe/mesh.hpp"
#include "febe/quadrature.hpp"

namespace febe {

// Piecewise linear scalar field given by nodal coefficients.
struct NodalField {
    const Mesh* mesh = nullptr;
    Eigen::VectorXd coeffs;

    NodalField() = default;
    explicit NodalField(const Mesh& m) : mesh(&m), coeffs(Eigen::VectorXd::Zero(m.num_nodes())) {}
    NodalField(const Mesh& m, Eigen::VectorXd c) : mesh(&m), coeffs(std::move(c)) {
        if (coeffs.size() != m.num_nodes())
            throw std::invalid_argument("NodalField: coefficient count mismatch");
    }
};

struct ExactSolution {
    std::function<double(const Vec2&)> value;
    std::function<Vec2(const Vec2&)> grad;
};

namespace detail {

// gradients of the three hat functions on triangle t, plus its area
struct TriGeom {
    std::array<Vec2, 3> grad;
    double area;
};

inline TriGeom tri_geometry(const Mesh& mesh, int t) {
    const auto& k = mesh.tris[t];
    const Vec2 a = mesh.nodes[k[0]], b = mesh.nodes[k[1]], c = mesh.nodes[k[2]];
    const double two_area = cross(b - a, c - a);
    TriGeom g;
    g.area = 0.5 * two_area;
    g.grad[0] = {(b.y - c.y) / two_area, (c.x - b.x) / two_area};
    g.grad[1] = {(c.y - a.y) / two_area, (a.x - c.x) / two_area};
    g.grad[2] = {(a.y - b.y) / two_area, (b.x - a.x) / two_area};
    return g;
}

inline Vec2 field_gradient(const Mesh& mesh, const Eigen::VectorXd& u, int t, const TriGeom& g) {
    const auto& k = mesh.tris[t];
    Vec2 gu{0, 0};
    for (int i = 0; i < 3; ++i) gu += u[k[i]] * g.grad[i];
    return gu;
}

inline bool has_vertex_at(const Mesh& mesh, int t, const Vec2& p) {
    for (int i = 0; i < 3; ++i)
        if (dist(mesh.nodes[mesh.tris[t][i]], p) < 1e-13) return true;
    return false;
}

// Integrates f over triangle t, grading towards `singular` when that point is
// one of the vertices.
inline double integrate_on_tri(const Mesh& mesh, int t,
                               const std::function<double(const Vec2&)>& f,
                               const std::optional<Vec2>& singular,
                               const TriangleRule& rule = triangle_rule_deg5()) {
    const auto& k = mesh.tris[t];
    std::array<Vec2, 3> v = {mesh.nodes[k[0]], mesh.nodes[k[1]], mesh.nodes[k[2]]};
    if (singular) {
        double d = std::numeric_limits<double>::max();
        for (int i = 0; i < 3; ++i) {
            if (dist(v[i], *singular) < 1e-13)
                return integrate_triangle_graded(v[i], v[(i + 1) % 3], v[(i + 2) % 3], f, 96);
            d = std::min(d, dist(v[i], *singular));
        }
        const double h = std::max({dist(v[0], v[1]), dist(v[1], v[2]), dist(v[2], v[0])});
        if (d < 8.0 * h) {
            // near-singular: subdivide until the rule resolves the variation
            const int sub = std::min(6, std::max(2, int(std::ceil(std::log2(8.0 * h / d)))));
            return integrate_triangle_refined(v[0], v[1], v[2], f, triangle_rule_deg10(), sub);
        }
    }
    return integrate_triangle(v[0], v[1], v[2], f, rule);
}

}  // namespace detail

// G(u) = int_Omega q(|grad u_h|), exact per element.
inline double assemble_energy(const MaterialLaw& law, const Mesh& mesh, const NodalField& u) {
    double sum = 0.0;
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        sum += g.area * law.energy_density(norm(detail::field_gradient(mesh, u.coeffs, t, g)));
    }
    return sum;
}

// load vector b_i = int_Omega f phi_i
inline Eigen::VectorXd assemble_load(const Mesh& mesh,
                                     const std::function<double(const Vec2&)>& f,
                                     const std::optional<Vec2>& singular = std::nullopt,
                                     const TriangleRule& rule = triangle_rule_deg5()) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
    for (int t = 0; t < mesh.num_tris(); ++t) {
        const auto& k = mesh.tris[t];
        for (int i = 0; i < 3; ++i) {
            // hat function of vertex i expressed barycentrically
            const Vec2 p0 = mesh.nodes[k[i]], p1 = mesh.nodes[k[(i + 1) % 3]],
                       p2 = mesh.nodes[k[(i + 2) % 3]];
            auto hat = [&](const Vec2& x) { return cross(p1 - x, p2 - x) / cross(p1 - p0, p2 - p0); };
            b[k[i]] += detail::integrate_on_tri(
                mesh, t, [&](const Vec2& x) { return f(x) * hat(x); }, singular, rule);
        }
    }
    return b;
}

// residual entries int_Omega rho(|grad u|) grad u . grad phi_i, exact per element
inline Eigen::VectorXd assemble_residual(const MaterialLaw& law, const Mesh& mesh,
                                         const NodalField& u) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.num_nodes());
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        const Vec2 gu = detail::field_gradient(mesh, u.coeffs, t, g);
        const double coef = law.rho(norm(gu)) * g.area;
        const auto& k = mesh.tris[t];
        for (int i = 0; i < 3; ++i) r[k[i]] += coef * dot(gu, g.grad[i]);
    }
    return r;
}

// Newton linearization of the residual; the rank-one term is dropped where the
// gradient degenerates.
inline Eigen::SparseMatrix<double> assemble_jacobian(const MaterialLaw& law, const Mesh& mesh,
                                                     const NodalField& u) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.num_tris());
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        const Vec2 gu = detail::field_gradient(mesh, u.coeffs, t, g);
        const double gn = norm(gu);
        const double r = law.rho(gn);
        const double dr = gn < 1e-14 ? 0.0 : law.drho(gn) / gn;
        const auto& k = mesh.tris[t];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                double v = r * dot(g.grad[j], g.grad[i]);
                if (dr != 0.0) v += dr * dot(gu, g.grad[j]) * dot(gu, g.grad[i]);
                trip.emplace_back(k[i], k[j], v * g.area);
            }
        }
    }
    Eigen::SparseMatrix<double> J(mesh.num_nodes(), mesh.num_nodes());
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

// (seminorm, full W^{1,p} norm) of u_exact - u_h
inline std::pair<double, double> w1p_error(const Mesh& mesh, const NodalField& u_h,
                                           const ExactSolution& exact, double p,
                                           const std::optional<Vec2>& singular = std::nullopt,
                                           const TriangleRule& rule = triangle_rule_deg5()) {
    double semi_p = 0.0, lp = 0.0;
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        const Vec2 gh = detail::field_gradient(mesh, u_h.coeffs, t, g);
        const auto& k = mesh.tris[t];
        const Vec2 a = mesh.nodes[k[0]], b = mesh.nodes[k[1]], c = mesh.nodes[k[2]];
        const double two_area = cross(b - a, c - a);
        auto uh_at = [&](const Vec2& x) {
            const double l0 = cross(b - x, c - x) / two_area;
            const double l1 = cross(c - x, a - x) / two_area;
            const double l2 = 1.0 - l0 - l1;
            return l0 * u_h.coeffs[k[0]] + l1 * u_h.coeffs[k[1]] + l2 * u_h.coeffs[k[2]];
        };
        semi_p += detail::integrate_on_tri(
            mesh, t, [&](const Vec2& x) { return std::pow(norm(exact.grad(x) - gh), p); },
            singular, rule);
        lp += detail::integrate_on_tri(
            mesh, t, [&](const Vec2& x) { return std::pow(std::abs(exact.value(x) - uh_at(x)), p); },
            singular, rule);
    }
    return {std::pow(semi_p, 1.0 / p), std::pow(lp + semi_p, 1.0 / p)};
}

// | u_exact - u_h |_{(1, u_h, p)}, the quasi-norm error with weight field u_h
inline double quasi_norm_error(const MaterialLaw& law, const Mesh& mesh, const NodalField& u_h,
                               const ExactSolution& exact,
                               const std::optional<Vec2>& singular = std::nullopt,
                               const TriangleRule& rule = triangle_rule_deg5()) {
    double sum = 0.0;
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        const Vec2 gh = detail::field_gradient(mesh, u_h.coeffs, t, g);
        const double wgt = norm(gh);
        sum += detail::integrate_on_tri(
            mesh, t,
            [&](const Vec2& x) { return law.g_pdelta(wgt, norm(exact.grad(x) - gh)); },
            singular, rule);
    }
    return std::sqrt(sum);
}

// discrete quasi-norm |v|_{(1,w,p)} for nodal fields (used by property tests)
inline double quasi_norm_discrete(const MaterialLaw& law, const Mesh& mesh,
                                  const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
    double sum = 0.0;
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        const double x = norm(detail::field_gradient(mesh, w, t, g));
        const double y = norm(detail::field_gradient(mesh, v, t, g));
        sum += g.area * law.g_pdelta(x, y);
    }
    return std::sqrt(sum);
}

inline double w1p_seminorm_discrete(const Mesh& mesh, const Eigen::VectorXd& v, double p) {
    double sum = 0.0;
    for (int t = 0; t < mesh.num_tris(); ++t) {
        auto g = detail::tri_geometry(mesh, t);
        sum += g.area * std::pow(norm(detail::field_gradient(mesh, v, t, g)), p);
    }
    return std::pow(sum, 1.0 / p);
}

}  // namespace febe
