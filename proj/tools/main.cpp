// Command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 configuration error, 3 check-suite failure.

#include "aplab/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
    std::string config_name = "pl11";
    std::string out_dir;
    std::optional<double> t;
    std::string t_range;
    std::optional<unsigned long long> seed;
    std::optional<int> jobs;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_name,
                    "config file path or built-in model name (pl11, smoothabs)");
    cmd->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
    cmd->add_option("--t", args.t, "parameter t (overrides run.t)");
    cmd->add_option("--t-range", args.t_range,
                    "t range LO:HI:STEP (sweep/branch) or LO:HI[:TOL] (bracket)");
    cmd->add_option("--seed", args.seed, "random seed (overrides run.seed)");
    cmd->add_option("--jobs", args.jobs, "worker count for the sweep");
    cmd->add_flag("--verbose", args.verbose, "print the run summary to stdout");
}

std::vector<double> split_range(const std::string& text, std::size_t min_fields,
                                std::size_t max_fields) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) out.push_back(std::stod(item));
    if (out.size() < min_fields || out.size() > max_fields)
        throw aplab::ConfigError("--t-range expects " + std::to_string(min_fields) +
                                 (max_fields > min_fields
                                      ? ".." + std::to_string(max_fields)
                                      : "") +
                                 " colon-separated numbers, got '" + text + "'");
    return out;
}

aplab::RunConfig load(const CommonArgs& args) {
    aplab::RunConfig config = aplab::load_config(args.config_name);
    if (args.t) config.t = *args.t;
    if (args.seed) config.seed = *args.seed;
    if (args.jobs) config.jobs = *args.jobs;
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    config.verbose = config.verbose || args.verbose;
    return config;
}

void emit(const aplab::RunReport& report, const aplab::RunConfig& config) {
    aplab::write_outputs(report, config, config.out_dir);
    if (config.verbose) {
        for (const auto& [k, v] : report.summary)
            std::cout << k << " = " << v << '\n';
    }
    for (const auto& check : report.checks)
        std::printf("[%s] %s: %s\n", check.pass ? "PASS" : "FAIL",
                    check.name.c_str(), check.measured.c_str());
    std::printf("%s: %s (outputs in %s)\n", report.command.c_str(),
                report.ok ? "ok" : "FAILED", config.out_dir.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for a degenerate Neumann problem with "
                 "two/one/zero solution structure in the forcing parameter"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* solve = app.add_subcommand("solve", "enumerate solutions at fixed t");
    CLI::App* sweep = app.add_subcommand("sweep", "solution counts over a t grid");
    CLI::App* branch = app.add_subcommand("branch", "trace the solution branch");
    CLI::App* bracket =
        app.add_subcommand("bracket", "bisect the solvability threshold t*");
    CLI::App* index =
        app.add_subcommand("index", "local indices and degree table at fixed t");
    CLI::App* check = app.add_subcommand("check", "run the invariant check suite");
    CLI::App* mms =
        app.add_subcommand("mms", "manufactured-solution convergence study");
    for (CLI::App* cmd : {solve, sweep, branch, bracket, index, check, mms})
        add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        const aplab::RunConfig config = load(args);
        aplab::RunReport report;

        if (solve->parsed()) {
            report = aplab::run_solve(config, config.t);
        } else if (sweep->parsed()) {
            std::vector<double> grid = config.t_grid;
            if (!args.t_range.empty()) {
                const auto r = split_range(args.t_range, 3, 3);
                grid.clear();
                for (double t = r[0]; t <= r[1] + 1e-12; t += r[2]) grid.push_back(t);
            }
            if (grid.empty())
                throw aplab::ConfigError(
                    "sweep: provide --t-range LO:HI:STEP or run.t_grid in the config");
            report = aplab::run_sweep(config, grid);
        } else if (branch->parsed()) {
            if (args.t_range.empty())
                throw aplab::ConfigError("branch: provide --t-range START:STOP:STEP");
            const auto r = split_range(args.t_range, 3, 3);
            report = aplab::run_branch(config, r[0], r[2], r[1]);
        } else if (bracket->parsed()) {
            if (args.t_range.empty())
                throw aplab::ConfigError("bracket: provide --t-range LO:HI[:TOL]");
            const auto r = split_range(args.t_range, 2, 3);
            const double tol = r.size() == 3 ? r[2] : 1e-6;
            report = aplab::run_bracket(config, r[0], r[1], tol);
        } else if (index->parsed()) {
            report = aplab::run_index(config, config.t);
        } else if (check->parsed()) {
            report = aplab::run_check(config);
        } else if (mms->parsed()) {
            report = aplab::run_mms(config);
        }

        emit(report, config);
        if (!report.ok) return report.command == "check" || report.command == "mms" ? 3 : 1;
        return 0;
    } catch (const aplab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
