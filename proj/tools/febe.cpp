#include <iostream>

#include <CLI11.hpp>

#include "febe/study.hpp"

int main(int argc, char** argv) {
    CLI::App app{"FEM-BEM coupling solver for friction transmission problems"};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "run a refinement study");
    int example = 2;
    int levels = 5;
    std::string mode = "uniform";
    double p = 3.0, epsilon = 1e-5, g = 0.5, rho = 25.0, frac = 0.1;
    std::string out_csv, dump_dir, backend = "direct";
    bool quiet = false;
    solve->add_option("--example", example, "problem: 1 (friction) or 2 (manufactured)")
        ->check(CLI::IsMember({1, 2}));
    solve->add_option("--levels", levels, "number of refinement levels")->check(CLI::PositiveNumber);
    solve->add_option("--mode", mode, "uniform or adaptive")
        ->check(CLI::IsMember({"uniform", "adaptive"}));
    solve->add_option("--p", p, "nonlinearity exponent");
    solve->add_option("--epsilon", epsilon, "regularization of the power law");
    solve->add_option("--g", g, "friction bound (example 1)");
    solve->add_option("--uzawa-rho", rho, "Uzawa damping parameter");
    solve->add_option("--mark-fraction", frac, "fraction of elements marked per adaptive step");
    solve->add_option("--out", out_csv, "write the study table to this CSV file");
    solve->add_option("--dump-meshes", dump_dir, "write per-level meshes into this directory");
    solve->add_option("--linear-backend", backend, "direct or iterative")
        ->check(CLI::IsMember({"direct", "iterative"}));
    solve->add_flag("--quiet", quiet, "suppress per-level progress");

    CLI11_PARSE(app, argc, argv);

    try {
        febe::ProblemSpec prob = example == 1 ? febe::example1_spec(p, epsilon, g, rho)
                                              : febe::example2_spec(p, epsilon);
        febe::StudyOptions opt;
        opt.mode = mode == "uniform" ? febe::StudyMode::Uniform : febe::StudyMode::Adaptive;
        opt.levels = levels;
        opt.mark_frac = frac;
        opt.verbose = !quiet;
        opt.dump_mesh_dir = dump_dir;
        opt.solve.linear_backend = backend == "direct" ? febe::LinearBackend::Direct
                                                       : febe::LinearBackend::Iterative;
        febe::StudyResult res = febe::run_study(prob, opt);
        if (!out_csv.empty()) febe::emit_csv(res, out_csv);
        febe::emit_csv(res, std::cout);
        std::cout << "# extrapolated energy " << std::setprecision(7) << res.J_extrapolated
                  << "\n";
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
