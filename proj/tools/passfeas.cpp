// passfeas: safe-pass advisory feasibility from the command line.
//
//   passfeas bounds <scenario.json> [--json]
//   passfeas run    <scenario.json> [--csv beacons.csv] [--json] [--seed N]
//   passfeas sweep  <scenario.json> (--spec sweep.json | --param P --values a,b,... | --range start:stop:step)
//                   [--unit mph|mps] [-o out.csv] [--seed N]
//   passfeas repro  [--json]
//
// Scenario names that are not found relative to the working directory are
// looked up in the preset directory ($PASSFEAS_DATA_DIR overrides it).

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "passfeas/commands.hpp"

namespace {

using namespace passfeas;

void add_overrides(CLI::App* cmd, std::optional<std::uint64_t>& seed, std::string& placement, std::string& terrain)
{
    cmd->add_option("--seed", seed, "RNG seed for probabilistic delivery (overrides sim.rng_seed)");
    cmd->add_option("--placement", placement, "Override channel.placement (inside_vehicle|rooftop)");
    cmd->add_option("--terrain", terrain, "Override the terrain profile file");
}

io::ScenarioOverrides make_overrides(const std::optional<std::uint64_t>& seed, const std::string& placement,
                                     const std::string& terrain)
{
    io::ScenarioOverrides ov;
    ov.seed = seed;
    if (!placement.empty()) {
        ov.placement = parse_placement(placement);
    }
    if (!terrain.empty()) {
        ov.terrain = terrain;
    }
    return ov;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Safe-pass advisory feasibility for DSRC V2V links"};
    app.require_subcommand(1);

    std::string scenario;
    bool json_output = false;
    std::optional<std::uint64_t> seed;
    std::string placement;
    std::string terrain;

    auto* bounds = app.add_subcommand("bounds", "Minimum maneuver time, minimum range and per-placement feasibility");
    bounds->add_option("scenario", scenario, "Scenario JSON file")->required();
    bounds->add_flag("--json", json_output, "Machine-readable output");

    std::string csv;
    auto* run = app.add_subcommand("run", "Simulate one encounter");
    run->add_option("scenario", scenario, "Scenario JSON file")->required();
    run->add_option("--csv", csv, "Write per-beacon CSV to this path");
    run->add_flag("--json", json_output, "Machine-readable summary");
    add_overrides(run, seed, placement, terrain);

    std::string spec_file;
    std::string param;
    std::vector<double> values;
    std::string range;
    std::string unit;
    std::string output;
    auto* sweep = app.add_subcommand("sweep", "Sweep one scenario parameter and tabulate results as CSV");
    sweep->add_option("scenario", scenario, "Scenario JSON file")->required();
    sweep->add_option("--spec", spec_file, "Sweep spec JSON file");
    sweep->add_option("--param", param, "Dotted parameter path, e.g. pass_scenario.v1");
    sweep->add_option("--values", values, "Comma-separated values")->delimiter(',');
    sweep->add_option("--range", range, "start:stop:step (inclusive)");
    sweep->add_option("--unit", unit, "Unit for speed parameters (mph|mps)");
    sweep->add_option("-o,--output", output, "CSV output path (default stdout)");
    add_overrides(sweep, seed, placement, terrain);

    auto* repro = app.add_subcommand("repro", "Reproduce the reference bounds, ranges and verdicts");
    repro->add_flag("--json", json_output, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kUsage;
    }

    if (repro->parsed()) {
        return cli::cmd_repro(json_output, std::cout, std::cerr);
    }

    return cli::guarded(std::cerr, [&] {
        cli::CommonOptions opt;
        opt.scenario = scenario;
        opt.json_output = json_output;
        opt.overrides = make_overrides(seed, placement, terrain);

        if (bounds->parsed()) {
            return cli::cmd_bounds(opt, std::cout, std::cerr);
        }
        if (run->parsed()) {
            std::optional<std::filesystem::path> csv_path;
            if (!csv.empty()) {
                csv_path = csv;
            }
            return cli::cmd_run(opt, csv_path, std::cout, std::cerr);
        }

        cli::SweepSpec spec;
        if (!spec_file.empty()) {
            spec = cli::parse_sweep_spec(io::read_json(io::resolve_path(spec_file)));
        }
        if (!param.empty()) {
            spec.param = param;
        }
        if (!values.empty()) {
            spec.values = values;
        }
        if (!range.empty()) {
            double start = 0.0;
            double stop = 0.0;
            double step = 0.0;
            char c1 = 0;
            char c2 = 0;
            std::istringstream in(range);
            if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':') {
                throw ValidationError("--range must be start:stop:step");
            }
            spec.values = cli::range_values(start, stop, step);
        }
        if (!unit.empty()) {
            spec.unit = unit;
        }
        if (!output.empty()) {
            spec.output = output;
        }
        return cli::cmd_sweep(opt, spec, std::cout, std::cerr);
    });
}
