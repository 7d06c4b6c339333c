#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcsim/dcsim.hpp"

namespace {

dcsim::Algorithm parse_algorithm_or_throw(const std::string& name) {
    const auto alg = dcsim::parse_algorithm(name);
    if (!alg) throw dcsim::ValidationError("unknown algorithm '" + name + "'");
    return *alg;
}

void apply_overrides(dcsim::ScenarioConfig& config, const std::vector<std::string>& algorithms,
                     const std::vector<std::uint64_t>& seeds, const std::string& baseline,
                     const std::string& out_dir, const std::string& trace) {
    if (!algorithms.empty()) {
        config.algorithms.clear();
        for (const std::string& name : algorithms)
            config.algorithms.push_back(parse_algorithm_or_throw(name));
    }
    if (!seeds.empty()) config.seeds = seeds;
    if (!baseline.empty()) config.baseline = parse_algorithm_or_throw(baseline);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (!trace.empty()) config.trace_path = trace;
    config.validate();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dcsim - energy-aware VM consolidation simulator"};
    app.require_subcommand(1);

    std::string scenario = "paper_default";
    std::vector<std::string> algorithms;
    std::vector<std::uint64_t> seeds;
    std::string baseline;
    std::string out_dir;
    std::string trace_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario,
                        "Scenario JSON file, or the built-in name 'paper_default'");
        sub->add_option("--out", out_dir, "Output directory");
    };

    CLI::App* validate = app.add_subcommand("validate", "Check a scenario and echo defaults");
    validate->add_option("--scenario", scenario,
                         "Scenario JSON file, or the built-in name 'paper_default'");
    bool dump = false;
    validate->add_flag("--dump", dump, "Print the resolved configuration");

    CLI::App* gen_trace = app.add_subcommand("gen-trace", "Generate and export a workload trace");
    gen_trace->add_option("--scenario", scenario,
                          "Scenario JSON file, or the built-in name 'paper_default'");
    std::uint64_t gen_seed = 0;
    bool gen_seed_set = false;
    gen_trace->add_option("--seed", gen_seed, "Workload seed (default: first scenario seed)")
        ->each([&](const std::string&) { gen_seed_set = true; });
    std::string gen_out = "trace.txt";
    gen_trace->add_option("--out", gen_out, "Trace file to write");

    CLI::App* simulate = app.add_subcommand("simulate", "Run one algorithm on one benchmark");
    add_common(simulate);
    std::string sim_algorithm = "omur";
    simulate->add_option("--algorithm", sim_algorithm, "mbfd | obfd | rbr | nur | omur");
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    simulate->add_option("--seed", sim_seed, "Workload seed (default: first scenario seed)")
        ->each([&](const std::string&) { sim_seed_set = true; });
    simulate->add_option("--trace", trace_path, "Replay this trace file instead of generating");

    CLI::App* compare = app.add_subcommand("compare", "Run the full comparison matrix");
    add_common(compare);
    compare->add_option("--algorithms", algorithms, "Algorithms to run")->delimiter(',');
    compare->add_option("--seeds", seeds, "Workload seeds")->delimiter(',');
    compare->add_option("--baseline", baseline, "Baseline algorithm for savings");
    compare->add_option("--trace", trace_path, "Replay this trace file instead of generating");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(validate)) {
            const dcsim::ScenarioConfig config = dcsim::load_scenario(scenario);
            config.validate();
            if (dump) std::cout << dcsim::scenario_to_json(config).dump(2) << "\n";
            std::cerr << "scenario ok: " << config.topology.rack_rows * config.topology.racks_per_row
                      << " racks, "
                      << config.topology.rack_rows * config.topology.racks_per_row *
                             config.topology.servers_per_rack
                      << " servers\n";
            return 0;
        }

        if (app.got_subcommand(gen_trace)) {
            const dcsim::ScenarioConfig config = dcsim::load_scenario(scenario);
            const std::uint64_t seed = gen_seed_set ? gen_seed : config.seeds.front();
            const dcsim::Trace trace =
                dcsim::generate_benchmark(dcsim::resolved_workload(config, seed));
            dcsim::write_trace(trace, std::filesystem::path(gen_out));
            std::cerr << "wrote " << gen_out << " (" << trace.epochs.size() << " epochs)\n";
            return 0;
        }

        if (app.got_subcommand(simulate)) {
            dcsim::ScenarioConfig config = dcsim::load_scenario(scenario);
            apply_overrides(config, {}, {}, "", out_dir, trace_path);
            const dcsim::Algorithm alg = parse_algorithm_or_throw(sim_algorithm);

            dcsim::Trace trace;
            std::uint64_t seed = sim_seed_set ? sim_seed : config.seeds.front();
            if (config.trace_path) {
                trace = dcsim::read_trace(std::filesystem::path(*config.trace_path));
                seed = trace.seed;
            } else {
                trace = dcsim::generate_benchmark(dcsim::resolved_workload(config, seed));
            }

            dcsim::EngineOptions options;
            options.epoch_seconds = config.workload.epoch_seconds;
            options.cost_model = config.migration;
            dcsim::SimulationReport rep = dcsim::run_simulation(
                dcsim::build_topology(config), config.thresholds, alg, trace, options);
            rep.seed = seed;

            const std::filesystem::path dir = config.output_dir;
            std::filesystem::create_directories(dir);
            const std::string run_name =
                "run_" + std::string(dcsim::to_string(alg)) + "_seed" + std::to_string(seed);
            dcsim::write_report_json(rep, dir / (run_name + ".report.json"));
            dcsim::write_epoch_csv(rep, dir / (run_name + ".epochs.csv"));
            dcsim::write_migration_csv(rep, dir / (run_name + ".migrations.csv"));
            std::cout << dcsim::report_to_json(rep).dump(2) << "\n";
            return 0;
        }

        if (app.got_subcommand(compare)) {
            dcsim::ScenarioConfig config = dcsim::load_scenario(scenario);
            apply_overrides(config, algorithms, seeds, baseline, out_dir, trace_path);
            const dcsim::ComparisonMatrix matrix =
                dcsim::run_comparison(config, config.output_dir);
            std::cerr << "comparison written to " << config.output_dir << "\n";
            for (const std::string& alg : matrix.algorithms) {
                std::cout << alg << ": total energy saving vs " << matrix.baseline << " = "
                          << dcsim::csv_num(matrix.cell(alg, "energy_total_wh").saving_pct_mean)
                          << "%\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
