#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "stars/bench.hpp"
#include "stars/config.hpp"
#include "stars/errors.hpp"
#include "stars/problems.hpp"
#include "stars/solver.hpp"

namespace fs = std::filesystem;
using namespace stars;

namespace {

std::string tau_label(double tau) {
    if (tau <= 0.0) return "0";
    const double exponent = std::log10(tau);
    const double rounded = std::round(exponent);
    if (std::abs(exponent - rounded) < 1e-12) {
        std::ostringstream out;
        out << "1e" << static_cast<long long>(rounded);
        return out.str();
    }
    std::ostringstream out;
    out << tau;
    return out.str();
}

int cmd_solve(RunConfigFile config) {
    const ProblemDef& def = find_problem(config.problem);

    SolverConfig solver = config.solver;
    int p = config.p;
    if (config.ensemble == EnsembleKind::identity) {
        if (p != 0 && p != def.dim)
            std::cerr << "warning: identity ensemble forces p = n = " << def.dim
                      << " (ignoring --p " << p << ")\n";
        p = def.dim;
        solver.ensemble = SketchEnsemble::identity(def.dim);
    } else if (config.ensemble == EnsembleKind::gaussian) {
        if (p == 0) p = std::min(def.dim, 100);
        solver.ensemble = SketchEnsemble::gaussian(def.dim, p);
    } else {
        if (p == 0) p = std::min(def.dim, 100);
        solver.ensemble = SketchEnsemble::hashing(def.dim, p, config.r);
    }
    config.p = p;
    solver.x0 = def.start;
    solver.h_opt = config.h_opt_override > 0.0 ? config.h_opt_override : def.h_opt;
    solver.budget = config.budget_mult * (def.dim + 1);
    solver.validate(def.dim);

    RngStream master = RngStream::from_key(config.seed);
    NoisyProblem problem = make_noisy(def, config.noise, master.derive("noise"));
    const std::string config_echo = config.to_json().dump();

    fs::create_directories(config.output_dir);
    RunTrace trace;
    try {
        trace = run(problem, solver, master.derive("sketch"));
    } catch (SolverError& e) {
        e.trace.config_json = config_echo;
        std::ofstream csv(fs::path(config.output_dir) / "trace.csv", std::ios::binary);
        write_trace_csv(e.trace, csv);
        std::ofstream summary(fs::path(config.output_dir) / "summary.json");
        write_trace_summary(e.trace, summary);
        std::cerr << "error: " << e.what() << "\n(partial trace written to "
                  << config.output_dir << ")\n";
        return 2;
    }
    trace.config_json = config_echo;

    std::ofstream csv(fs::path(config.output_dir) / "trace.csv", std::ios::binary);
    write_trace_csv(trace, csv);
    std::ofstream summary(fs::path(config.output_dir) / "summary.json");
    write_trace_summary(trace, summary);

    std::cout << config.problem << ": " << trace.records.size() << " iterations, "
              << trace.total_evaluations << " evaluations, best estimate "
              << trace.final_best_estimate;
    if (!trace.best_true_history.empty())
        std::cout << ", best true f " << trace.best_true_history.back().second;
    std::cout << "\noutputs: " << (fs::path(config.output_dir) / "trace.csv").string() << ", "
              << (fs::path(config.output_dir) / "summary.json").string() << '\n';
    return 0;
}

int cmd_bench(const RunConfigFile& config, bool dry_run) {
    if (!config.has_grid) throw ConfigError("bench requires a 'bench' section in the config");
    ExperimentGrid grid = config.grid;
    grid.master_seed = config.seed;
    grid.validate();

    const std::size_t instances = grid.problems.size() * grid.noise_forms.size() *
                                  grid.distributions.size() *
                                  static_cast<std::size_t>(grid.replications);
    if (dry_run) {
        std::cout << "grid: " << instances << " instances x " << grid.variants.size()
                  << " variants = " << instances * grid.variants.size() << " runs\n";
        return 0;
    }

    const fs::path out_dir = config.output_dir;
    GridRunStats stats;
    const auto records = run_grid(grid, out_dir, &stats);
    std::cout << "grid complete: " << stats.computed << " computed, " << stats.loaded
              << " loaded, " << stats.failed << " failed\n";

    for (const double tau : grid.taus) {
        const auto profiles = compute_profile(records, tau, grid.budget_mult);
        const fs::path svg = out_dir / ("profile_tau" + tau_label(tau) + ".svg");
        std::ostringstream title;
        title << "Data profiles, tau = " << tau;
        emit_profile_svg(profiles, title.str(), svg);
        std::cout << "wrote " << svg.string() << '\n';
        std::cout << "fraction solved at budget " << grid.budget_mult << "(n+1), tau = " << tau
                  << ":\n";
        for (const auto& profile : profiles)
            std::cout << "  " << profile.variant << "  " << profile.solved_fraction.back()
                      << '\n';
    }
    return 0;
}

int cmd_list_problems(const std::string& format) {
    if (format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& def : catalog())
            arr.push_back({{"name", def.name},
                           {"n", def.dim},
                           {"m", def.residual_count},
                           {"h_opt", def.h_opt}});
        std::cout << arr.dump(2) << '\n';
        return 0;
    }
    std::cout << "name        n    m    h_opt\n";
    for (const auto& def : catalog()) {
        std::ostringstream row;
        row << def.name;
        while (row.str().size() < 12) row << ' ';
        char h_opt[16];
        std::snprintf(h_opt, sizeof(h_opt), "%.0e", def.h_opt);
        std::cout << row.str() << def.dim << "  " << def.residual_count << "  " << h_opt
                  << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"STARS: stochastic trust-region optimization in random subspaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "run the solver on one problem");
    std::string problem_name, ensemble_name = "gaussian", noise_form = "add",
                noise_dist = "normal";
    int p = 0, r = 1;
    double sigma = 1e-3, h_opt = 0.0;
    long long budget_mult = 1500, n_samples = 0;
    double gamma = 0.0, eta1 = -1.0, eta2 = 0.0, delta0 = 0.0, delta_max = 0.0, c1 = 0.0;
    bool align_diag = false;
    solve->add_option("--config", config_path, "JSON run configuration");
    solve->add_option("--problem", problem_name, "catalog problem name");
    solve->add_option("--ensemble", ensemble_name, "gaussian|hashing|identity");
    solve->add_option("--p", p, "subspace dimension");
    solve->add_option("--r", r, "hashing nonzeros per row");
    solve->add_option("--sigma", sigma, "noise standard deviation");
    solve->add_option("--noise", noise_form, "add|mult");
    solve->add_option("--dist", noise_dist, "normal|uniform");
    solve->add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_set = true; });
    solve->add_option("--budget-mult", budget_mult, "budget = mult * (n+1)");
    solve->add_option("--h-opt", h_opt, "forward-difference step override");
    solve->add_option("--nk", n_samples, "samples per estimate");
    solve->add_option("--gamma", gamma, "radius growth factor");
    solve->add_option("--eta1", eta1, "acceptance threshold");
    solve->add_option("--eta2", eta2, "gradient-radius threshold");
    solve->add_option("--delta0", delta0, "initial radius");
    solve->add_option("--delta-max", delta_max, "radius cap");
    solve->add_option("--c1", c1, "sample-ball factor");
    solve->add_option("--out", out_dir, "output directory");
    solve->add_flag("--align-diag", align_diag, "log |Q^T grad f|/|grad f| per iteration");

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "run the experiment grid and emit data profiles");
    bool dry_run = false;
    int jobs = 0;
    std::vector<double> taus;
    bench->add_option("--config", config_path, "JSON run configuration")->required();
    bench->add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_set = true; });
    bench->add_option("--jobs", jobs, "parallel runs (default: cores)");
    bench->add_option("--tau", taus, "convergence tolerances (overrides config)");
    bench->add_option("--out", out_dir, "output directory");
    bench->add_flag("--dry-run", dry_run, "print the grid size without running");

    // ---- list-problems ----
    auto* list = app.add_subcommand("list-problems", "print the benchmark catalog");
    std::string format = "table";
    list->add_option("--format", format, "table|json");

    // ---- print-default-config ----
    auto* print_config =
        app.add_subcommand("print-default-config", "emit a complete config template");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (print_config->parsed()) {
            std::cout << default_config_json().dump(2) << '\n';
            return 0;
        }
        if (list->parsed()) return cmd_list_problems(format);

        RunConfigFile config;
        if (!config_path.empty()) config = RunConfigFile::load(config_path);
        if (seed_set) config.seed = seed;
        if (!out_dir.empty()) config.output_dir = out_dir;

        if (bench->parsed()) {
            if (jobs > 0) config.grid.jobs = jobs;
            if (!taus.empty()) config.grid.taus = taus;
            return cmd_bench(config, dry_run);
        }

        // solve: apply command-line overrides on top of the config file
        if (solve->count("--problem")) config.problem = problem_name;
        if (solve->count("--ensemble"))
            config.ensemble = ensemble_kind_from_string(ensemble_name);
        if (solve->count("--p")) config.p = p;
        if (solve->count("--r")) config.r = r;
        if (solve->count("--sigma")) config.noise.sigma = sigma;
        if (solve->count("--noise")) config.noise.form = noise_form_from_string(noise_form);
        if (solve->count("--dist")) config.noise.dist = noise_dist_from_string(noise_dist);
        if (solve->count("--budget-mult")) config.budget_mult = budget_mult;
        if (solve->count("--h-opt")) config.h_opt_override = h_opt;
        if (solve->count("--nk")) config.solver.n_samples = n_samples;
        if (solve->count("--gamma")) config.solver.gamma = gamma;
        if (solve->count("--eta1")) config.solver.eta1 = eta1;
        if (solve->count("--eta2")) config.solver.eta2 = eta2;
        if (solve->count("--delta0")) config.solver.delta0 = delta0;
        if (solve->count("--delta-max")) config.solver.delta_max = delta_max;
        if (solve->count("--c1")) config.solver.c1 = c1;
        if (align_diag) config.solver.log_alignment = true;
        if (config.problem.empty())
            throw ConfigError("solve requires --problem or a config file naming one");
        return cmd_solve(std::move(config));
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
