// Command-line front end: batch experiment runner, generator verification,
// and the four-arrow diagram reproduction.  Exit codes: 0 all checks passed,
// 1 at least one statistical check failed, 2 config or I/O trouble.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "socdyn/errors.hpp"
#include "socdyn/experiments.hpp"
#include "socdyn/io.hpp"

namespace {

void print_checks(const std::vector<socdyn::CheckResult>& checks) {
    for (const auto& c : checks)
        std::printf("[%s] %s: value=%.6g tolerance=%.6g\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.value, c.tolerance);
}

int outcome_to_exit(const socdyn::ExperimentOutcome& outcome) {
    return outcome.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interacting-particle criticality simulator and verification harness"};
    app.require_subcommand(1);

    // --- run ---
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
    run_cmd->add_option("config", config_path, "Flat key = value config file")->required();

    // --- verify-generators ---
    std::string n_list = "2,10,100";
    std::string verify_out = "out/generator_suite";
    std::uint64_t verify_seed = 1;
    auto* verify_cmd =
        app.add_subcommand("verify-generators", "Closed-form identity and decay checks");
    verify_cmd->add_option("--n", n_list, "Comma-separated particle counts")
        ->capture_default_str();
    verify_cmd->add_option("--out", verify_out, "Output directory")->capture_default_str();
    verify_cmd->add_option("--seed", verify_seed, "Stream seed")->capture_default_str();

    // --- diagram ---
    double diagram_sigma_sq = 1.0;
    std::string diagram_out = "out/diagram";
    std::uint64_t diagram_seed = 1;
    int diagram_workers = 4;
    auto* diagram_cmd = app.add_subcommand(
        "diagram", "Run all four convergence arrows at desk scale");
    diagram_cmd->add_option("--sigma-sq", diagram_sigma_sq, "Temperature parameter")
        ->capture_default_str();
    diagram_cmd->add_option("--out", diagram_out, "Output directory")->capture_default_str();
    diagram_cmd->add_option("--seed", diagram_seed, "Stream seed")->capture_default_str();
    diagram_cmd->add_option("--workers", diagram_workers, "Replica worker threads")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // Help and version are not errors; everything else is a usage problem.
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) {
            const socdyn::ExperimentConfig cfg = socdyn::load_config_file(config_path);
            const socdyn::ExperimentOutcome outcome = socdyn::run_experiment(cfg);
            print_checks(outcome.checks);
            std::printf("report: %s/report.json\n", cfg.out_dir.c_str());
            return outcome_to_exit(outcome);
        }

        if (*verify_cmd) {
            socdyn::ExperimentConfig cfg;
            cfg.experiment = "generator_suite";
            cfg.n_values = socdyn::detail::parse_int_list("n", n_list);
            cfg.seed = verify_seed;
            cfg.out_dir = verify_out;
            const socdyn::ExperimentOutcome outcome = socdyn::run_experiment(cfg);
            print_checks(outcome.checks);
            std::printf("report: %s/report.json\n", cfg.out_dir.c_str());
            return outcome_to_exit(outcome);
        }

        // Diagram: the four arrows at their default desk-scale sizes, each in
        // its own subdirectory, plus an aggregate report.
        const std::vector<std::string> arrows = {"arrow_a1", "arrow_a2", "arrow_a3", "arrow_a4"};
        std::vector<socdyn::CheckResult> all_checks;
        for (const auto& arrow : arrows) {
            socdyn::ExperimentConfig cfg;
            cfg.experiment = arrow;
            cfg.sigma_sq = diagram_sigma_sq;
            cfg.seed = diagram_seed;
            cfg.workers = diagram_workers;
            cfg.out_dir = diagram_out + "/" + arrow;
            std::printf("-- %s --\n", arrow.c_str());
            const socdyn::ExperimentOutcome outcome = socdyn::run_experiment(cfg);
            print_checks(outcome.checks);
            for (const auto& c : outcome.checks) all_checks.push_back(c);
        }
        socdyn::ExperimentConfig summary;
        summary.experiment = "diagram";
        summary.sigma_sq = diagram_sigma_sq;
        summary.seed = diagram_seed;
        summary.out_dir = diagram_out;
        socdyn::detail::ensure_outdir_writable(summary.out_dir);
        socdyn::detail::write_report(summary, all_checks);
        bool all = true;
        for (const auto& c : all_checks) all = all && c.pass;
        std::printf("diagram report: %s/report.json\n", diagram_out.c_str());
        return all ? 0 : 1;
    } catch (const socdyn::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const socdyn::io_error& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        // The computation itself failed (path blow-up, sampler breakdown):
        // that is a failed experiment, not a usage problem.
        std::fprintf(stderr, "experiment failed: %s\n", e.what());
        return 1;
    }
}
