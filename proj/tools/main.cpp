#include "gridfreq/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Secondary frequency control simulator for lossless power networks"};
    app.require_subcommand(1);

    gridfreq::Overrides ov;
    std::string case_path;
    std::string out_dir;
    double dt = 0.0;
    double t_max = 0.0;
    std::uint64_t seed = 0;
    std::string controller;
    double k = 0.0;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--case", case_path, "Case file (overrides the scenario)");
        cmd->add_option("--out", out_dir, "Output directory");
        cmd->add_option("--dt", dt, "Integration step, s");
        cmd->add_option("--tmax", t_max, "Simulated horizon, s");
        cmd->add_option("--seed", seed, "Redraw controller cost weights from this seed");
        cmd->add_option("--controller", controller, "Control law: piac, piac_multi, piac_decentralized, agc, gb, dai");
        cmd->add_option("--k", k, "Controller gain");
    };

    std::string scenario;
    bool relative = false;
    auto* simulate = app.add_subcommand("simulate", "Run one scenario and write trajectory.csv and summary.json");
    simulate->add_option("--scenario,scenario", scenario, "Scenario file")->required();
    simulate->add_flag("--relative", relative, "Also write frequencies relative to the aggregate frequency");
    add_overrides(simulate);

    std::vector<std::string> scenarios;
    auto* compare = app.add_subcommand("compare", "Run several scenarios on the same case and tabulate metrics");
    compare->add_option("--scenario,scenarios", scenarios, "Scenario files")->required();
    add_overrides(compare);

    std::string param;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "Run one scenario over a list of parameter values");
    sweep->add_option("--scenario", scenario, "Scenario file")->required();
    sweep->add_option("--param", param, "Parameter: k, k_GB or dt")->required();
    sweep->add_option("--values", values, "Values, comma separated")->required()->delimiter(',');
    add_overrides(sweep);

    auto* validate = app.add_subcommand("validate-case", "Check a case file and its operating point");
    validate->add_option("--case,case", case_path, "Case file")->required();

    CLI11_PARSE(app, argc, argv);

    auto collect = [&](CLI::App* cmd) {
        if (cmd->count("--case")) ov.case_path = case_path;
        if (cmd->count("--out")) ov.out = out_dir;
        if (cmd->count("--dt")) ov.dt = dt;
        if (cmd->count("--tmax")) ov.t_max = t_max;
        if (cmd->count("--seed")) ov.seed = seed;
        if (cmd->count("--controller")) ov.controller = controller;
        if (cmd->count("--k")) ov.k = k;
    };

    if (*simulate) {
        collect(simulate);
        return gridfreq::cmd_simulate(scenario, ov, relative, std::cout, std::cerr);
    }
    if (*compare) {
        collect(compare);
        std::vector<std::filesystem::path> paths(scenarios.begin(), scenarios.end());
        return gridfreq::cmd_compare(paths, ov, std::cout, std::cerr);
    }
    if (*sweep) {
        collect(sweep);
        return gridfreq::cmd_sweep(scenario, param, values, ov, std::cout, std::cerr);
    }
    return gridfreq::cmd_validate_case(case_path, std::cout, std::cerr);
}
