#pragma once

#include <algorithm>
#include <functional>

#include "febe/common.hpp"

namespace febe {

// Nonlinearity rho(t) = (epsilon + t)^(p-2) together with the derived energy
// density q, the weight omega and the convexity function used by the estimator.
class MaterialLaw {
  public:
    enum class Mode { PowerLaw, Custom };

    MaterialLaw(double p, double delta, double epsilon)
        : p_(p), delta_(delta), epsilon_(epsilon) {
        if (p < 2.0) throw std::invalid_argument("MaterialLaw: p must be >= 2");
        if (delta < 0.0 || delta > 1.0) throw std::invalid_argument("MaterialLaw: delta in [0,1]");
        if (epsilon < 0.0) throw std::invalid_argument("MaterialLaw: epsilon >= 0");
    }

    // Custom law: user supplies rho and rho'.
    MaterialLaw(double p, double delta,
                std::function<double(double)> rho_fn,
                std::function<double(double)> drho_fn)
        : p_(p), delta_(delta), epsilon_(0.0), mode_(Mode::Custom),
          rho_fn_(std::move(rho_fn)), drho_fn_(std::move(drho_fn)) {}

    double p() const { return p_; }
    double p_conj() const { return p_ / (p_ - 1.0); }
    double delta() const { return delta_; }
    double epsilon() const { return epsilon_; }
    Mode mode() const { return mode_; }

    double rho(double t) const {
        if (mode_ == Mode::Custom) return rho_fn_(t);
        if (p_ == 2.0) return 1.0;
        return std::pow(epsilon_ + t, p_ - 2.0);
    }

    double drho(double t) const {
        if (mode_ == Mode::Custom) return drho_fn_(t);
        if (p_ == 2.0) return 0.0;
        // rho' is unbounded at t=0 for epsilon=0, p<3; Jacobian assembly clamps.
        double base = epsilon_ + std::max(t, p_ < 3.0 && epsilon_ == 0.0 ? 1e-14 : 0.0);
        return (p_ - 2.0) * std::pow(base, p_ - 3.0);
    }

    // q(t) = int_0^t s rho(s) ds, closed form for the power law.
    double energy_density(double t) const {
        if (mode_ == Mode::Custom) {
            // trapezoid-free fallback: Gauss on [0,t]
            double sum = 0.0;
            const int n = 32;
            for (int i = 0; i < n; ++i) {
                double s = t * (i + 0.5) / n;
                sum += s * rho_fn_(s) * (t / n);
            }
            return sum;
        }
        if (p_ == 2.0) return 0.5 * t * t;
        const double e = epsilon_;
        return (std::pow(e + t, p_ - 1.0) * ((p_ - 1.0) * t - e) + std::pow(e, p_)) /
               (p_ * (p_ - 1.0));
    }

    // omega(x,y) = (|x|+|y|)^delta (1+|x|+|y|)^(1-delta)
    double omega(double x, double y) const {
        const double s = std::abs(x) + std::abs(y);
        if (delta_ == 0.0) return 1.0 + s;
        if (delta_ == 1.0) return s;
        return std::pow(s, delta_) * std::pow(1.0 + s, 1.0 - delta_);
    }

    // G_{p,delta}(x,y) = y^2 omega(x,y)^(p-2), zero when |x|+|y| = 0.
    double g_pdelta(double x, double y) const {
        if (std::abs(x) + std::abs(y) == 0.0) return 0.0;
        if (p_ == 2.0) return y * y;
        return y * y * std::pow(omega(x, y), p_ - 2.0);
    }

  private:
    double p_;
    double delta_;
    double epsilon_;
    Mode mode_ = Mode::PowerLaw;
    std::function<double(double)> rho_fn_;
    std::function<double(double)> drho_fn_;
};

// G_{p',1}(x,y) with the fully degenerate weight, as used by the data
// oscillation term.
inline double g_conj_degenerate(double p, double x, double y) {
    const double pc = p / (p - 1.0);
    const double s = std::abs(x) + std::abs(y);
    if (s == 0.0) return 0.0;
    return y * y * std::pow(s, pc - 2.0);
}

// Scalar Young-type inequality
//   lambda*mu <= max(eps^-1, eps^(1/(1-p))) (a^(p-1)+lambda)^(p'-2) lambda^2
//               + eps (a+mu)^(p-2) mu^2
// Returns whether it holds (test utility).
inline bool young_quasi_bound(double lambda, double mu, double a, double eps, double p) {
    if (lambda == 0.0 || mu == 0.0) return true;
    const double pc = p / (p - 1.0);
    const double lhs = lambda * mu;
    const double coef = std::max(1.0 / eps, std::pow(eps, 1.0 / (1.0 - p)));
    const double rhs = coef * std::pow(std::pow(a, p - 1.0) + lambda, pc - 2.0) * lambda * lambda +
                       eps * std::pow(a + mu, p - 2.0) * mu * mu;
    return lhs <= rhs * (1.0 + 1e-12) + 1e-300;
}

}  // namespace febe
