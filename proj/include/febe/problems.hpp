#pragma once

#include <optional>

#include "febe/fem.hpp"
#include "febe/material.hpp"
#include "febe/mesh.hpp"

namespace febe {

// Data of one transmission problem on the L-shaped domain.
struct ProblemSpec {
    MaterialLaw law;
    double g = 0.0;          // friction bound on Gamma_s
    double uzawa_rho = 25.0;
    bool friction_boundary = true;   // false: Gamma_s is empty
    std::function<double(const Vec2&)> f;                     // volume load
    std::function<Vec2(const Vec2&)> grad_f;                  // optional, for the h^2 oscillation variant
    std::function<double(const Vec2&)> u0;                    // boundary datum
    std::function<double(const Vec2&, const Vec2&)> t0;       // flux datum, needs the normal
    ExactSolution exact;                                      // empty if unknown
    bool has_exact = false;
    std::optional<Vec2> singular;                             // grading point for quadrature
};

namespace problems {

// polar angle measured from the ray phi = pi/2 bounding the re-entrant
// corner; range [pi/2, 5pi/2) with the domain living in [pi/2, 2pi]
inline double corner_angle(const Vec2& x) {
    double phi = std::atan2(x.y, x.x);
    if (phi < M_PI / 2.0 - 1e-12) phi += 2.0 * M_PI;
    return phi;
}

// r^{2/3} sin(2/3 (phi - pi/2)), harmonic with zero trace on both corner rays
inline double corner_value(const Vec2& x) {
    const double r = norm(x);
    if (r == 0.0) return 0.0;
    return std::pow(r, 2.0 / 3.0) * std::sin((2.0 / 3.0) * (corner_angle(x) - M_PI / 2.0));
}

inline Vec2 corner_grad(const Vec2& x) {
    const double r = norm(x);
    if (r == 0.0) return {0.0, 0.0};
    const double a = 2.0 / 3.0;
    const double phi = corner_angle(x);
    const double s = std::sin(a * (phi - M_PI / 2.0));
    const double c = std::cos(a * (phi - M_PI / 2.0));
    const Vec2 er{std::cos(phi), std::sin(phi)};
    const Vec2 ep{-std::sin(phi), std::cos(phi)};
    return a * std::pow(r, a - 1.0) * (s * er + c * ep);
}

}  // namespace problems

// Friction example: f = 0, boundary data from the corner singularity,
// t0 its plain normal derivative, slip bound g on the bottom/left sides.
inline ProblemSpec example1_spec(double p = 3.0, double eps = 1e-5, double g = 0.5,
                                 double rho = 25.0, double delta = 0.5) {
    ProblemSpec ps{MaterialLaw(p, delta, eps)};
    ps.g = g;
    ps.uzawa_rho = rho;
    ps.f = nullptr;
    ps.u0 = problems::corner_value;
    ps.t0 = [](const Vec2& x, const Vec2& nu) { return dot(problems::corner_grad(x), nu); };
    ps.has_exact = false;
    ps.singular = Vec2{0.0, 0.0};
    return ps;
}

// Frictionless example with known solution u = r^{2/3} sin(2/3 (phi - pi/2))
// inside and zero outside; the data u0, t0, f are manufactured from it.
inline ProblemSpec example2_spec(double p = 3.0, double eps = 1e-5, double delta = 0.5) {
    ProblemSpec ps{MaterialLaw(p, delta, eps)};
    ps.g = 0.0;
    ps.friction_boundary = false;
    const MaterialLaw law = ps.law;
    // f = -div(rho(|grad u|) grad u) with |grad u| = (2/3) r^{-1/3}:
    // the angular part is unchanged, so f = -(d rho/dr) du/dr; for the power
    // law this evaluates to the closed form below (p = 3 branch kept general
    // through rho').
    ps.f = [law](const Vec2& x) {
        const double r = norm(x);
        if (r == 0.0) return 0.0;
        const double a = 2.0 / 3.0;
        const double gn = a * std::pow(r, a - 1.0);           // |grad u|
        const double dgn = a * (a - 1.0) * std::pow(r, a - 2.0);
        const double phi = problems::corner_angle(x);
        const double s = std::sin(a * (phi - M_PI / 2.0));
        // -grad rho . grad u; rho(|grad u|) Laplace(u) = 0 for harmonic u
        // grad|grad u| is radial, du/dr = a r^{a-1} s
        return -law.drho(gn) * dgn * a * std::pow(r, a - 1.0) * s;
    };
    ps.u0 = problems::corner_value;
    ps.t0 = [law](const Vec2& x, const Vec2& nu) {
        const Vec2 gu = problems::corner_grad(x);
        return law.rho(norm(gu)) * dot(gu, nu);
    };
    ps.exact.value = problems::corner_value;
    ps.exact.grad = problems::corner_grad;
    ps.has_exact = true;
    ps.singular = Vec2{0.0, 0.0};
    return ps;
}

// coarsest study mesh for a problem; drops friction labels when Gamma_s is empty
inline Mesh initial_mesh(const ProblemSpec& prob, int levels = 0) {
    Mesh m = build_lshape(levels);
    if (!prob.friction_boundary)
        for (auto& e : m.boundary) e.label = BoundaryLabel::GammaT;
    return m;
}

}  // namespace febe
