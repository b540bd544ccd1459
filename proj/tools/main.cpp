#include "fractherm/cli.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"fractherm - fractional nonlocal thermistor solver"};
    app.require_subcommand(1);

    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress progress lines");

    std::string solve_config, converge_config, validate_config;
    CLI::App* solve = app.add_subcommand("solve", "run a local / global / gronwall config");
    solve->add_option("config", solve_config, "JSON run configuration")->required();
    CLI::App* converge = app.add_subcommand("converge", "run a grid-refinement study");
    converge->add_option("config", converge_config, "JSON run configuration")->required();
    CLI::App* validate = app.add_subcommand("validate", "audit the growth hypotheses");
    validate->add_option("config", validate_config, "JSON run configuration")->required();

    CLI11_PARSE(app, argc, argv);

    if (solve->parsed()) return fractherm::cli::run_solve(solve_config, quiet);
    if (converge->parsed()) return fractherm::cli::run_converge(converge_config, quiet);
    return fractherm::cli::run_validate(validate_config, quiet);
}
