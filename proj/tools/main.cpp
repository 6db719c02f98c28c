// Command line front end: run a scenario, compare two regulatory variants,
// or validate / canonicalize a norm file.
//
// Exit codes: 0 success, 1 validation failure (bad input of any kind),
// 2 runtime contract violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "polisim/polisim.hpp"

namespace {

int run_command(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                std::optional<std::int64_t> steps, const std::string& out_dir, bool log_available) {
    polisim::ScenarioConfig config = polisim::load_scenario(scenario_path);
    if (seed) config.seed = *seed;
    if (steps) {
        if (*steps < 1) throw polisim::ValidationError("--steps must be a positive integer");
        config.steps = *steps;
    }
    const polisim::RunOutputs outputs = polisim::run_scenario(config, log_available);
    polisim::write_run_outputs(outputs, out_dir, log_available);
    std::cout << "run complete: " << config.name << ", seed " << config.seed << ", "
              << config.steps << " steps, " << outputs.world.agents.size() << " agents\n";
    return 0;
}

int compare_command(const std::string& baseline_path, const std::string& variant_path,
                    const std::string& out_dir) {
    const polisim::ScenarioConfig baseline = polisim::load_scenario(baseline_path);
    const polisim::ScenarioConfig variant = polisim::load_scenario(variant_path);
    const polisim::ComparisonOutcome outcome = polisim::compare_scenarios(baseline, variant);
    polisim::write_report_json(outcome.report, out_dir);
    std::cout << "compare complete: " << outcome.report.at("norm_changes").size()
              << " norm change(s), report written\n";
    return 0;
}

int validate_command(const std::string& norms_path) {
    const auto norms = polisim::parse_norms_file(norms_path);
    std::cout << "OK: " << norms.size() << " norm(s)\n";
    return 0;
}

int parse_norms_command(const std::string& norms_path, const std::string& out_path) {
    const auto norms = polisim::parse_norms_file(norms_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw polisim::ValidationError("cannot write output file: " + out_path);
    out << polisim::canonicalize(norms);
    std::cout << "wrote " << norms.size() << " norm(s) to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Needs-based agent simulation under ADICO-encoded policies"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> steps;
    std::string out_dir;
    bool log_available = false;
    CLI::App* run = app.add_subcommand("run", "Run one scenario and write metrics/events/state");
    run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--seed", seed, "Override the scenario's seed");
    run->add_option("--steps", steps, "Override the scenario's step count");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_flag("--log-available", log_available, "Also write per-step available action sets");

    std::string baseline_path;
    std::string variant_path;
    std::string compare_out;
    CLI::App* compare = app.add_subcommand("compare", "Run two variants differing only in active norms");
    compare->add_option("--baseline", baseline_path, "Baseline scenario JSON file")->required();
    compare->add_option("--variant", variant_path, "Variant scenario JSON file")->required();
    compare->add_option("--out", compare_out, "Output directory")->required();

    std::string norms_path;
    CLI::App* validate = app.add_subcommand("validate", "Parse and validate a norm file");
    validate->add_option("--norms", norms_path, "Norm DSL file")->required();

    std::string parse_in;
    std::string parse_out;
    CLI::App* parse = app.add_subcommand("parse-norms", "Parse a norm file and write its canonical form");
    parse->add_option("--norms", parse_in, "Norm DSL file")->required();
    parse->add_option("--out", parse_out, "Canonical output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return run_command(scenario_path, seed, steps, out_dir, log_available);
        if (compare->parsed()) return compare_command(baseline_path, variant_path, compare_out);
        if (validate->parsed()) return validate_command(norms_path);
        if (parse->parsed()) return parse_norms_command(parse_in, parse_out);
    } catch (const polisim::ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 2;
    } catch (const polisim::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
