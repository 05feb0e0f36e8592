#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <fairdyn/runner.hpp>

int main(int argc, char** argv) {
    CLI::App app{"fairness-constrained thresholds and population dynamics"};
    app.require_subcommand(1);

    std::string config;
    fairdyn::RunOptions opt;
    std::uint64_t seed = 0;
    double ratio = 1.0;

    CLI::App* cmd_run = app.add_subcommand("run", "execute the configured experiment");
    cmd_run->add_option("config", config, "scenario config file")->required();
    cmd_run->add_option("--jobs", opt.jobs, "worker threads for sweep cells");
    cmd_run->add_option("--out", opt.out_dir, "directory for output files");
    CLI::Option* seed_opt =
        cmd_run->add_option("--seed", seed, "override the configured seed");

    CLI::App* cmd_validate =
        app.add_subcommand("validate", "check a config without running it");
    cmd_validate->add_option("config", config, "scenario config file")->required();

    CLI::App* cmd_oneshot = app.add_subcommand(
        "oneshot", "solve one weighted problem and print the pair as JSON");
    cmd_oneshot->add_option("config", config, "scenario config file")->required();
    cmd_oneshot->add_option("--ratio", ratio, "weight ratio alpha_a/alpha_b")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (cmd_run->parsed()) {
        if (seed_opt->count() > 0) opt.seed = seed;
        return fairdyn::run(config, opt, std::cout, std::cerr);
    }
    if (cmd_validate->parsed()) {
        return fairdyn::validate_config(config, std::cout, std::cerr);
    }
    return fairdyn::oneshot(config, ratio, std::cout, std::cerr);
}
