#pragma once

#include <iomanip>

#include "febe/estimator.hpp"

namespace febe {

struct StudyRow {
    int dof = 0;
    double err_w1p = 0.0, rate_w1p = 0.0;
    double err_q = 0.0, rate_q = 0.0;
    double eta = 0.0, eff_u = 0.0, eff_q = 0.0;
    double J_h = 0.0, dJ = 0.0;
    int uzawa_its = 0, newton_its = 0;
    double time_s = 0.0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    double J_extrapolated = 0.0;
};

// Fit J_i = J_inf + C N_i^alpha through the last three samples; falls back to
// Aitken extrapolation when the increments are not monotone.
inline double extrapolate_energy(const std::vector<double>& dof, const std::vector<double>& J) {
    const std::size_t n = J.size();
    if (n < 3) return J.empty() ? 0.0 : J.back();
    const double N1 = dof[n - 3], N2 = dof[n - 2], N3 = dof[n - 1];
    const double J1 = J[n - 3], J2 = J[n - 2], J3 = J[n - 1];
    const double d1 = J1 - J2, d2 = J2 - J3;
    if (d1 * d2 > 0.0 && std::abs(d2) < std::abs(d1)) {
        const double target = d1 / d2;
        auto mismatch = [&](double a) {
            return (std::pow(N1, a) - std::pow(N2, a)) / (std::pow(N2, a) - std::pow(N3, a)) -
                   target;
        };
        double lo = -5.0, hi = -1e-6;
        if (mismatch(lo) * mismatch(hi) < 0.0) {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (mismatch(lo) * mismatch(mid) <= 0.0 ? hi : lo) = mid;
            }
            const double a = 0.5 * (lo + hi);
            const double C = d2 / (std::pow(N2, a) - std::pow(N3, a));
            return J3 - C * std::pow(N3, a);
        }
    }
    // Aitken
    const double denom = (J3 - J2) - (J2 - J1);
    if (denom == 0.0) return J3;
    return J3 - (J3 - J2) * (J3 - J2) / denom;
}

enum class StudyMode { Uniform, Adaptive };

struct StudyOptions {
    StudyMode mode = StudyMode::Uniform;
    int levels = 5;
    double mark_frac = 0.1;
    SolveOptions solve;
    std::string dump_mesh_dir;   // empty: no dumps
    bool verbose = false;
};

inline StudyResult run_study(const ProblemSpec& prob, const StudyOptions& opt) {
    StudyResult out;
    Mesh mesh = initial_mesh(prob);
    std::vector<double> dofs, energies;
    for (int level = 0; level < opt.levels; ++level) {
        DiscreteSystem sys = build_system(mesh, prob);
        SolveResult sol = solve_coupled(sys, opt.solve);
        EstimateResult est = estimate_error(sys, sol);

        StudyRow row;
        row.dof = sys.dof();
        row.eta = est.eta();
        row.J_h = sol.energy_J;
        row.uzawa_its = sol.uzawa_its;
        row.newton_its = sol.newton_worst;
        row.time_s = sol.solve_seconds;
        if (prob.has_exact) {
            NodalField uh(mesh, sol.u);
            row.err_w1p = w1p_error(mesh, uh, prob.exact, prob.law.p(), prob.singular).second;
            row.err_q = quasi_norm_error(prob.law, mesh, uh, prob.exact, prob.singular);
            row.eff_u = row.err_w1p / row.eta;
            row.eff_q = row.err_q / row.eta;
        }
        if (!out.rows.empty()) {
            const StudyRow& prev = out.rows.back();
            const double dn = std::log(double(row.dof) / prev.dof);
            if (prob.has_exact) {
                row.rate_w1p = std::log(row.err_w1p / prev.err_w1p) / dn;
                row.rate_q = std::log(row.err_q / prev.err_q) / dn;
            }
        }
        out.rows.push_back(row);
        dofs.push_back(row.dof);
        energies.push_back(row.J_h);

        if (!opt.dump_mesh_dir.empty())
            dump_mesh(mesh, opt.dump_mesh_dir + "/mesh_level_" + std::to_string(level) + ".txt");
        if (opt.verbose) {
            std::ostringstream msg;
            msg << "level " << level << " dof " << row.dof << " eta " << row.eta
                << " J " << row.J_h << " uzawa " << row.uzawa_its
                << " newton " << row.newton_its;
            std::fputs((msg.str() + "\n").c_str(), stderr);
        }

        if (level + 1 < opt.levels) {
            if (opt.mode == StudyMode::Uniform) {
                mesh = refine_uniform(mesh);
            } else {
                mesh = refine_adaptive(mesh, mark_fraction(est.element, opt.mark_frac));
            }
        }
    }
    out.J_extrapolated = extrapolate_energy(dofs, energies);
    for (auto& row : out.rows) row.dJ = row.J_h - out.J_extrapolated;
    return out;
}

inline void emit_csv(const StudyResult& res, std::ostream& os) {
    os << "dof,err_w1p,rate_w1p,err_q,rate_q,eta,eff_u,eff_q,J_h,dJ,uzawa_its,newton_its,time_s\n";
    os << std::setprecision(7);
    for (const auto& r : res.rows) {
        os << r.dof << "," << r.err_w1p << "," << r.rate_w1p << "," << r.err_q << ","
           << r.rate_q << "," << r.eta << "," << r.eff_u << "," << r.eff_q << "," << r.J_h
           << "," << r.dJ << "," << r.uzawa_its << "," << r.newton_its << "," << r.time_s
           << "\n";
    }
}

inline void emit_csv(const StudyResult& res, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_csv: cannot open " + path);
    emit_csv(res, os);
}

}  // namespace febe
