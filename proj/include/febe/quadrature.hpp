#pragma once

#include <functional>

#include "febe/common.hpp"

namespace febe {

// Quadrature rule on the reference triangle in barycentric coordinates.
// Weights are normalized to sum to 1; integrals scale with the element area.
struct TriangleRule {
    std::vector<std::array<double, 3>> points;  // barycentric
    std::vector<double> weights;
    int degree = 0;
};

// Symmetric 7-point rule, exact for degree 5.
inline const TriangleRule& triangle_rule_deg5() {
    static const TriangleRule rule = [] {
        TriangleRule r;
        r.degree = 5;
        const double a1 = 0.0597158717897698;   // (6 - sqrt(15)) / 21 group midpoint pair
        const double b1 = 0.4701420641051151;
        const double a2 = 0.7974269853530873;
        const double b2 = 0.1012865073234563;
        const double w0 = 9.0 / 40.0;
        const double w1 = 0.1323941527885062;   // (155 + sqrt(15)) / 1200
        const double w2 = 0.1259391805448271;   // (155 - sqrt(15)) / 1200
        r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
        r.weights.push_back(w0);
        r.points.push_back({a1, b1, b1});
        r.points.push_back({b1, a1, b1});
        r.points.push_back({b1, b1, a1});
        r.weights.insert(r.weights.end(), 3, w1);
        r.points.push_back({a2, b2, b2});
        r.points.push_back({b2, a2, b2});
        r.points.push_back({b2, b2, a2});
        r.weights.insert(r.weights.end(), 3, w2);
        return r;
    }();
    return rule;
}

// Dunavant 25-point rule, exact for degree 10 (used to validate the degree-5 rule
// on singular integrands).
inline const TriangleRule& triangle_rule_deg10() {
    static const TriangleRule rule = [] {
        TriangleRule r;
        r.degree = 10;
        auto centroid = [&](double w) {
            r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
            r.weights.push_back(w);
        };
        auto sym3 = [&](double a, double w) {
            const double b = (1.0 - a) / 2.0;
            r.points.push_back({a, b, b});
            r.points.push_back({b, a, b});
            r.points.push_back({b, b, a});
            r.weights.insert(r.weights.end(), 3, w);
        };
        auto sym6 = [&](double a, double b, double w) {
            const double c = 1.0 - a - b;
            r.points.push_back({a, b, c});
            r.points.push_back({a, c, b});
            r.points.push_back({b, a, c});
            r.points.push_back({b, c, a});
            r.points.push_back({c, a, b});
            r.points.push_back({c, b, a});
            r.weights.insert(r.weights.end(), 6, w);
        };
        centroid(0.090817990382754);
        sym3(0.028844733232685, 0.036725957756467);
        sym3(0.781036849029926, 0.045321059435528);
        sym6(0.141707219414880, 0.307939838764121, 0.072757916845420);
        sym6(0.025003534762686, 0.246672560639903, 0.028327242531057);
        sym6(0.009540815400299, 0.066803251012200, 0.009421666963733);
        return r;
    }();
    return rule;
}

// Gauss-Legendre nodes on [0,1].
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;  // sum to 1
};

inline const LineRule& line_rule(int n) {
    static const LineRule g4 = [] {
        LineRule r;
        const double x[] = {0.3399810435848563, 0.8611363115940526};
        const double w[] = {0.6521451548625461, 0.3478548451374538};
        for (int i = 1; i >= 0; --i) { r.points.push_back(0.5 * (1 - x[i])); r.weights.push_back(0.5 * w[i]); }
        for (int i = 0; i < 2; ++i) { r.points.push_back(0.5 * (1 + x[i])); r.weights.push_back(0.5 * w[i]); }
        return r;
    }();
    static const LineRule g8 = [] {
        LineRule r;
        const double x[] = {0.1834346424956498, 0.5255324099163290,
                            0.7966664774136267, 0.9602898564975363};
        const double w[] = {0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};
        for (int i = 3; i >= 0; --i) { r.points.push_back(0.5 * (1 - x[i])); r.weights.push_back(0.5 * w[i]); }
        for (int i = 0; i < 4; ++i) { r.points.push_back(0.5 * (1 + x[i])); r.weights.push_back(0.5 * w[i]); }
        return r;
    }();
    return n <= 4 ? g4 : g8;
}

// Integrate f over the physical triangle (a,b,c).
inline double integrate_triangle(const Vec2& a, const Vec2& b, const Vec2& c,
                                 const std::function<double(const Vec2&)>& f,
                                 const TriangleRule& rule = triangle_rule_deg5()) {
    const double area = 0.5 * std::abs(cross(b - a, c - a));
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& l = rule.points[q];
        Vec2 x = l[0] * a + l[1] * b + l[2] * c;
        sum += rule.weights[q] * f(x);
    }
    return area * sum;
}

// Uniformly red-subdivides the triangle `sub` times before applying the rule.
inline double integrate_triangle_refined(const Vec2& a, const Vec2& b, const Vec2& c,
                                         const std::function<double(const Vec2&)>& f,
                                         const TriangleRule& rule, int sub) {
    if (sub == 0) return integrate_triangle(a, b, c, f, rule);
    const Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    return integrate_triangle_refined(a, ab, ca, f, rule, sub - 1) +
           integrate_triangle_refined(ab, b, bc, f, rule, sub - 1) +
           integrate_triangle_refined(ca, bc, c, f, rule, sub - 1) +
           integrate_triangle_refined(ab, bc, ca, f, rule, sub - 1);
}

// Composite rule with geometric grading towards vertex `a` (placed first).
// Splits off self-similar shells around `a`; handles integrable point
// singularities like r^{-5/3} at that vertex.  The shell error is self-similar,
// so each shell is integrated with a subdivided high-order rule.
inline double integrate_triangle_graded(const Vec2& a, const Vec2& b, const Vec2& c,
                                        const std::function<double(const Vec2&)>& f,
                                        int levels = 96,
                                        const TriangleRule& rule = triangle_rule_deg10(),
                                        int sub = 2) {
    double sum = 0.0;
    Vec2 pb = b, pc = c;
    for (int k = 0; k < levels; ++k) {
        Vec2 mb = 0.5 * (a + pb);
        Vec2 mc = 0.5 * (a + pc);
        // the two outer children of the split of (a, pb, pc)
        sum += integrate_triangle_refined(mb, pb, pc, f, rule, sub);
        sum += integrate_triangle_refined(mb, pc, mc, f, rule, sub);
        pb = mb;
        pc = mc;
    }
    sum += integrate_triangle(a, pb, pc, f, rule);
    return sum;
}

// Integrate f along segment [a,b].
inline double integrate_segment(const Vec2& a, const Vec2& b,
                                const std::function<double(const Vec2&)>& f,
                                const LineRule& rule = line_rule(8)) {
    const double len = dist(a, b);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        Vec2 x = a + rule.points[q] * (b - a);
        sum += rule.weights[q] * f(x);
    }
    return len * sum;
}

// Composite Gauss with geometric refinement towards endpoint `a`.
inline double integrate_segment_graded(const Vec2& a, const Vec2& b,
                                       const std::function<double(const Vec2&)>& f,
                                       int levels = 48,
                                       const LineRule& rule = line_rule(8)) {
    double sum = 0.0;
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < levels; ++k) {
        lo = hi * 0.5;
        sum += integrate_segment(a + lo * (b - a), a + hi * (b - a), f, rule);
        hi = lo;
    }
    sum += integrate_segment(a, a + hi * (b - a), f, rule);
    return sum;
}

}  // namespace febe
