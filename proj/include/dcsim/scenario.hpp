#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcsim/engine.hpp"
#include "dcsim/errors.hpp"
#include "dcsim/placement.hpp"
#include "dcsim/report.hpp"
#include "dcsim/workload.hpp"

namespace dcsim {

inline constexpr const char* kScenarioSchema = "dcsim-scenario-1";
inline constexpr const char* kMatrixCsvSchema = "# dcsim-matrix-1";
inline constexpr const char* kMatrixSeedsCsvSchema = "# dcsim-matrix-seeds-1";

struct TopologySpec {
    int rack_rows = 2;
    int racks_per_row = 4;
    int servers_per_rack = 10;
    int aggregate_fanin_racks = 4;  // racks per aggregate switch; remainder on the last one
    double tor_switch_watts = 366.0;
    double aggregate_switch_watts = 405.0;
    double core_router_watts = 3500.0;
    double rack_cooling_watts = 950.0;
};

struct ServerSpec {
    int capacity_mips = 2000;
    int memory_mb = 10240;
    int storage_gb = 1000;
    int nic_bandwidth_mbps = 1000;
    double p_max_watts = 250.0;
    double k_idle_fraction = 0.7;
};

// Everything a batch run needs: hardware, thresholds, workload (or a trace
// file to replay), the algorithms and seeds to sweep, and output routing.
struct ScenarioConfig {
    TopologySpec topology;
    ServerSpec server;
    Thresholds thresholds;
    WorkloadConfig workload;
    std::optional<std::string> trace_path;
    std::vector<Algorithm> algorithms = all_algorithms();
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
    Algorithm baseline = Algorithm::Mbfd;
    std::string output_dir = "out";
    MigrationCostModel migration;

    void validate() const {
        if (topology.rack_rows <= 0 || topology.racks_per_row <= 0 ||
            topology.servers_per_rack <= 0)
            throw ValidationError("topology counts must be positive");
        if (topology.aggregate_fanin_racks <= 0)
            throw ValidationError("aggregate_fanin_racks must be positive");
        if (topology.tor_switch_watts <= 0 || topology.aggregate_switch_watts <= 0 ||
            topology.core_router_watts <= 0 || topology.rack_cooling_watts <= 0)
            throw ValidationError("device power constants must be positive");
        if (server.capacity_mips <= 0 || server.memory_mb <= 0 || server.storage_gb <= 0 ||
            server.nic_bandwidth_mbps <= 0)
            throw ValidationError("server resources must be positive");
        if (server.p_max_watts <= 0)
            throw ValidationError("server p_max_watts must be positive");
        if (server.k_idle_fraction < 0 || server.k_idle_fraction > 1)
            throw ValidationError("server k_idle_fraction must be in [0,1]");
        thresholds.validate();
        workload.validate();
        if (algorithms.empty()) throw ValidationError("at least one algorithm is required");
        if (seeds.empty()) throw ValidationError("at least one seed is required");
        if (migration.effective_bandwidth_mbps <= 0)
            throw ValidationError("migration bandwidth must be positive");
        if (std::find(algorithms.begin(), algorithms.end(), baseline) == algorithms.end())
            throw ValidationError("baseline algorithm must be in the algorithms list");
    }
};

inline Topology build_topology(const ScenarioConfig& config) {
    Topology topo;
    const int rack_count = config.topology.rack_rows * config.topology.racks_per_row;
    ServerId next_server = 0;
    for (int r = 0; r < rack_count; ++r) {
        Rack rack;
        rack.id = static_cast<RackId>(r);
        rack.tor_switch_power_watts = config.topology.tor_switch_watts;
        rack.cooling_power_watts = config.topology.rack_cooling_watts;
        for (int s = 0; s < config.topology.servers_per_rack; ++s) {
            Server server;
            server.id = next_server++;
            server.rack_id = rack.id;
            server.capacity_mips = config.server.capacity_mips;
            server.memory_mb = config.server.memory_mb;
            server.storage_gb = config.server.storage_gb;
            server.nic_bandwidth_mbps = config.server.nic_bandwidth_mbps;
            server.p_max_watts = config.server.p_max_watts;
            server.k_idle_fraction = config.server.k_idle_fraction;
            rack.server_ids.push_back(server.id);
            topo.servers.push_back(server);
        }
        topo.racks.push_back(std::move(rack));
    }
    for (int r = 0; r < rack_count; r += config.topology.aggregate_fanin_racks) {
        AggregateSwitch agg;
        agg.power_watts = config.topology.aggregate_switch_watts;
        for (int k = r; k < std::min(rack_count, r + config.topology.aggregate_fanin_racks); ++k)
            agg.rack_ids.push_back(static_cast<RackId>(k));
        topo.aggregate_switches.push_back(std::move(agg));
    }
    topo.core_router_power_watts = config.topology.core_router_watts;
    validate_topology(topo);
    return topo;
}

// The workload generator caps total VM capacity at the datacenter capacity
// unless the scenario pins an explicit cap.
inline WorkloadConfig resolved_workload(const ScenarioConfig& config, std::uint64_t seed) {
    WorkloadConfig wl = config.workload;
    wl.rng_seed = seed;
    if (wl.capacity_cap_mips == 0)
        wl.capacity_cap_mips = build_topology(config).total_capacity_mips();
    return wl;
}

namespace detail {

using nlohmann::ordered_json;

inline void require_keys(const ordered_json& obj, const std::string& scope,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ValidationError("unknown key '" + (scope.empty() ? key : scope + "." + key) +
                                  "'");
}

template <typename T>
inline void read_field(const ordered_json& obj, const std::string& scope, const char* key,
                       T& out) {
    if (!obj.contains(key)) return;
    try {
        obj.at(key).get_to(out);
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("key '" + (scope.empty() ? key : scope + "." + key) +
                              "' has the wrong type");
    }
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const nlohmann::ordered_json& j) {
    using detail::read_field;
    using detail::require_keys;
    ScenarioConfig config;

    require_keys(j, "",
                 {"schema", "topology", "server", "thresholds", "workload", "trace_path",
                  "algorithms", "seeds", "baseline", "output_dir", "migration"});
    if (j.contains("schema")) {
        std::string schema;
        read_field(j, "", "schema", schema);
        if (schema != kScenarioSchema)
            throw ValidationError("unsupported scenario schema '" + schema + "'");
    }

    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        require_keys(t, "topology",
                     {"rack_rows", "racks_per_row", "servers_per_rack", "aggregate_fanin_racks",
                      "tor_switch_watts", "aggregate_switch_watts", "core_router_watts",
                      "rack_cooling_watts"});
        read_field(t, "topology", "rack_rows", config.topology.rack_rows);
        read_field(t, "topology", "racks_per_row", config.topology.racks_per_row);
        read_field(t, "topology", "servers_per_rack", config.topology.servers_per_rack);
        read_field(t, "topology", "aggregate_fanin_racks", config.topology.aggregate_fanin_racks);
        read_field(t, "topology", "tor_switch_watts", config.topology.tor_switch_watts);
        read_field(t, "topology", "aggregate_switch_watts", config.topology.aggregate_switch_watts);
        read_field(t, "topology", "core_router_watts", config.topology.core_router_watts);
        read_field(t, "topology", "rack_cooling_watts", config.topology.rack_cooling_watts);
    }
    if (j.contains("server")) {
        const auto& s = j.at("server");
        require_keys(s, "server",
                     {"capacity_mips", "memory_mb", "storage_gb", "nic_bandwidth_mbps",
                      "p_max_watts", "k_idle_fraction"});
        read_field(s, "server", "capacity_mips", config.server.capacity_mips);
        read_field(s, "server", "memory_mb", config.server.memory_mb);
        read_field(s, "server", "storage_gb", config.server.storage_gb);
        read_field(s, "server", "nic_bandwidth_mbps", config.server.nic_bandwidth_mbps);
        read_field(s, "server", "p_max_watts", config.server.p_max_watts);
        read_field(s, "server", "k_idle_fraction", config.server.k_idle_fraction);
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        require_keys(t, "thresholds", {"lower", "upper"});
        read_field(t, "thresholds", "lower", config.thresholds.lower_utilization);
        read_field(t, "thresholds", "upper", config.thresholds.upper_utilization);
    }
    if (j.contains("workload")) {
        const auto& w = j.at("workload");
        require_keys(w, "workload",
                     {"epochs", "initial_vm_count", "vm_capacity_choices", "vm_memory_mb",
                      "vm_storage_gb", "p_leave", "p_demand_change", "arrival_rate",
                      "epoch_seconds", "capacity_cap_mips"});
        read_field(w, "workload", "epochs", config.workload.epochs);
        read_field(w, "workload", "initial_vm_count", config.workload.initial_vm_count);
        read_field(w, "workload", "vm_capacity_choices", config.workload.vm_capacity_choices);
        read_field(w, "workload", "vm_memory_mb", config.workload.vm_memory_mb);
        read_field(w, "workload", "vm_storage_gb", config.workload.vm_storage_gb);
        read_field(w, "workload", "p_leave", config.workload.p_leave);
        read_field(w, "workload", "p_demand_change", config.workload.p_demand_change);
        read_field(w, "workload", "arrival_rate", config.workload.arrival_rate);
        read_field(w, "workload", "epoch_seconds", config.workload.epoch_seconds);
        read_field(w, "workload", "capacity_cap_mips", config.workload.capacity_cap_mips);
    }
    if (j.contains("trace_path")) {
        if (!j.at("trace_path").is_null()) {
            std::string path;
            read_field(j, "", "trace_path", path);
            config.trace_path = path;
        }
    }
    if (j.contains("algorithms")) {
        std::vector<std::string> names;
        read_field(j, "", "algorithms", names);
        config.algorithms.clear();
        for (const std::string& name : names) {
            const auto alg = parse_algorithm(name);
            if (!alg) throw ValidationError("unknown algorithm '" + name + "'");
            config.algorithms.push_back(*alg);
        }
    }
    read_field(j, "", "seeds", config.seeds);
    if (j.contains("baseline")) {
        std::string name;
        read_field(j, "", "baseline", name);
        const auto alg = parse_algorithm(name);
        if (!alg) throw ValidationError("unknown baseline algorithm '" + name + "'");
        config.baseline = *alg;
    }
    read_field(j, "", "output_dir", config.output_dir);
    if (j.contains("migration")) {
        const auto& m = j.at("migration");
        require_keys(m, "migration", {"effective_bandwidth_mbps", "nas_assumed"});
        read_field(m, "migration", "effective_bandwidth_mbps",
                   config.migration.effective_bandwidth_mbps);
        read_field(m, "migration", "nas_assumed", config.migration.nas_assumed);
    }

    config.validate();
    return config;
}

// Full echo of the config with every default filled in.
inline nlohmann::ordered_json scenario_to_json(const ScenarioConfig& config) {
    nlohmann::ordered_json j;
    j["schema"] = kScenarioSchema;
    j["topology"] = {
        {"rack_rows", config.topology.rack_rows},
        {"racks_per_row", config.topology.racks_per_row},
        {"servers_per_rack", config.topology.servers_per_rack},
        {"aggregate_fanin_racks", config.topology.aggregate_fanin_racks},
        {"tor_switch_watts", config.topology.tor_switch_watts},
        {"aggregate_switch_watts", config.topology.aggregate_switch_watts},
        {"core_router_watts", config.topology.core_router_watts},
        {"rack_cooling_watts", config.topology.rack_cooling_watts},
    };
    j["server"] = {
        {"capacity_mips", config.server.capacity_mips},
        {"memory_mb", config.server.memory_mb},
        {"storage_gb", config.server.storage_gb},
        {"nic_bandwidth_mbps", config.server.nic_bandwidth_mbps},
        {"p_max_watts", config.server.p_max_watts},
        {"k_idle_fraction", config.server.k_idle_fraction},
    };
    j["thresholds"] = {
        {"lower", config.thresholds.lower_utilization},
        {"upper", config.thresholds.upper_utilization},
    };
    j["workload"] = {
        {"epochs", config.workload.epochs},
        {"initial_vm_count", config.workload.initial_vm_count},
        {"vm_capacity_choices", config.workload.vm_capacity_choices},
        {"vm_memory_mb", config.workload.vm_memory_mb},
        {"vm_storage_gb", config.workload.vm_storage_gb},
        {"p_leave", config.workload.p_leave},
        {"p_demand_change", config.workload.p_demand_change},
        {"arrival_rate", config.workload.arrival_rate},
        {"epoch_seconds", config.workload.epoch_seconds},
        {"capacity_cap_mips", config.workload.capacity_cap_mips},
    };
    if (config.trace_path)
        j["trace_path"] = *config.trace_path;
    else
        j["trace_path"] = nullptr;
    std::vector<std::string> names;
    for (Algorithm a : config.algorithms) names.emplace_back(to_string(a));
    j["algorithms"] = names;
    j["seeds"] = config.seeds;
    j["baseline"] = std::string(to_string(config.baseline));
    j["output_dir"] = config.output_dir;
    j["migration"] = {
        {"effective_bandwidth_mbps", config.migration.effective_bandwidth_mbps},
        {"nas_assumed", config.migration.nas_assumed},
    };
    return j;
}

// The datacenter of the reference experiments: two rows of four racks, ten
// 2000-MIPS servers each, 40/80% thresholds, HP switch and cooling constants.
inline ScenarioConfig paper_default_scenario() { return ScenarioConfig{}; }

inline ScenarioConfig load_scenario(const std::string& path_or_name) {
    if (path_or_name == "paper_default") return paper_default_scenario();
    std::ifstream is(path_or_name);
    if (!is) throw ValidationError("cannot open scenario file: " + path_or_name);
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("scenario '" + path_or_name + "' is not valid JSON: " + e.what());
    }
    return scenario_from_json(j);
}

// --- comparison harness -----------------------------------------------------

struct MetricCell {
    std::vector<double> per_seed;
    std::vector<double> per_seed_saving_pct;
    double mean = 0.0;
    double saving_pct_mean = 0.0;  // mean of per-seed savings vs the baseline
};

struct ComparisonMatrix {
    std::vector<std::string> algorithms;
    std::string baseline;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> metrics;
    // algorithm -> metric -> cell
    std::map<std::string, std::map<std::string, MetricCell>> cells;

    const MetricCell& cell(const std::string& algorithm, const std::string& metric) const {
        return cells.at(algorithm).at(metric);
    }
};

namespace detail {

inline const std::vector<std::string>& comparison_metrics() {
    static const std::vector<std::string> metrics = {
        "avg_active_servers", "avg_active_racks", "energy_servers_wh", "energy_network_wh",
        "energy_cooling_wh",  "energy_total_wh",  "migrations",        "sla_violation_rate",
    };
    return metrics;
}

inline double metric_value(const SimulationReport& r, const std::string& metric) {
    if (metric == "avg_active_servers") return r.avg_active_servers;
    if (metric == "avg_active_racks") return r.avg_active_racks;
    if (metric == "energy_servers_wh") return EnergyLedger::to_watt_hours(r.energy_servers_j);
    if (metric == "energy_network_wh") return EnergyLedger::to_watt_hours(r.energy_network_j);
    if (metric == "energy_cooling_wh") return EnergyLedger::to_watt_hours(r.energy_cooling_j);
    if (metric == "energy_total_wh") return EnergyLedger::to_watt_hours(r.energy_total_j);
    if (metric == "migrations") return static_cast<double>(r.total_migrations);
    if (metric == "sla_violation_rate") return r.sla.violation_rate();
    throw LookupError("unknown metric " + metric);
}

// Cost-like saving: positive when `value` is below the baseline. A zero
// baseline with a zero value saves exactly 0; otherwise the saving is
// undefined and reported as NaN.
inline double saving_pct(double baseline, double value) {
    if (baseline == 0.0) return value == 0.0 ? 0.0 : std::nan("");
    return 100.0 * (baseline - value) / baseline;
}

}  // namespace detail

// Runs every (algorithm, seed) pair of the scenario, writes per-run report
// JSON, per-epoch CSV, migration-log CSV and the plot series, and builds the
// Table-1-style savings matrix against the configured baseline.
inline ComparisonMatrix run_comparison(const ScenarioConfig& config,
                                       const std::filesystem::path& out_dir,
                                       EngineOptions::Checks checks = EngineOptions::Checks::EndOnly) {
    config.validate();
    std::filesystem::create_directories(out_dir);
    {
        auto os = open_out(out_dir / "resolved_config.json");
        os << scenario_to_json(config).dump(2) << "\n";
    }

    const Topology topo = build_topology(config);

    std::optional<Trace> file_trace;
    std::vector<std::uint64_t> seeds = config.seeds;
    if (config.trace_path) {
        file_trace = read_trace(std::filesystem::path(*config.trace_path));
        seeds = {file_trace->seed};
    }

    std::vector<SimulationReport> reports;
    for (Algorithm alg : config.algorithms) {
        for (std::uint64_t seed : seeds) {
            const std::string run_name =
                "run_" + std::string(to_string(alg)) + "_seed" + std::to_string(seed);
            try {
                const Trace trace =
                    file_trace ? *file_trace : generate_benchmark(resolved_workload(config, seed));
                EngineOptions options;
                options.epoch_seconds = config.workload.epoch_seconds;
                options.cost_model = config.migration;
                options.checks = checks;
                SimulationReport rep = run_simulation(topo, config.thresholds, alg, trace, options);
                rep.seed = seed;
                write_report_json(rep, out_dir / (run_name + ".report.json"));
                write_epoch_csv(rep, out_dir / (run_name + ".epochs.csv"));
                write_migration_csv(rep, out_dir / (run_name + ".migrations.csv"));
                reports.push_back(std::move(rep));
            } catch (const std::exception& e) {
                auto os = open_out(out_dir / "comparison_error.txt");
                os << "INCOMPLETE: run " << run_name << " failed: " << e.what() << "\n";
                throw ValidationError("comparison aborted; " + run_name + " failed: " + e.what());
            }
        }
    }

    emit_plot_series(reports, out_dir);

    // Matrix assembly.
    ComparisonMatrix matrix;
    matrix.baseline = std::string(to_string(config.baseline));
    matrix.seeds = seeds;
    matrix.metrics = detail::comparison_metrics();
    for (Algorithm a : config.algorithms) matrix.algorithms.emplace_back(to_string(a));

    auto report_for = [&](Algorithm alg, std::uint64_t seed) -> const SimulationReport& {
        for (const auto& r : reports)
            if (r.algorithm == to_string(alg) && r.seed == seed) return r;
        throw LookupError("missing run for matrix assembly");
    };

    for (Algorithm alg : config.algorithms) {
        for (const std::string& metric : matrix.metrics) {
            MetricCell cell;
            for (std::uint64_t seed : seeds) {
                const double value = detail::metric_value(report_for(alg, seed), metric);
                const double base = detail::metric_value(report_for(config.baseline, seed), metric);
                cell.per_seed.push_back(value);
                cell.per_seed_saving_pct.push_back(detail::saving_pct(base, value));
            }
            double sum = 0.0, ssum = 0.0;
            for (double v : cell.per_seed) sum += v;
            for (double v : cell.per_seed_saving_pct) ssum += v;
            cell.mean = sum / static_cast<double>(cell.per_seed.size());
            cell.saving_pct_mean = ssum / static_cast<double>(cell.per_seed_saving_pct.size());
            matrix.cells[std::string(to_string(alg))][metric] = std::move(cell);
        }
    }

    // Table-1-style means + savings.
    {
        auto os = open_out(out_dir / "comparison_matrix.csv");
        os << kMatrixCsvSchema << "\n";
        os << "# baseline " << matrix.baseline << "\n";
        os << "algorithm";
        for (const std::string& m : matrix.metrics)
            os << ',' << m << "_mean," << m << "_saving_pct";
        os << "\n";
        for (const std::string& alg : matrix.algorithms) {
            os << alg;
            for (const std::string& m : matrix.metrics) {
                const MetricCell& cell = matrix.cell(alg, m);
                os << ',' << csv_num(cell.mean) << ',' << csv_num(cell.saving_pct_mean);
            }
            os << "\n";
        }
    }
    // Per-seed long form.
    {
        auto os = open_out(out_dir / "comparison_per_seed.csv");
        os << kMatrixSeedsCsvSchema << "\n";
        os << "algorithm,seed,metric,value,saving_pct\n";
        for (const std::string& alg : matrix.algorithms)
            for (std::size_t i = 0; i < seeds.size(); ++i)
                for (const std::string& m : matrix.metrics) {
                    const MetricCell& cell = matrix.cell(alg, m);
                    os << alg << ',' << seeds[i] << ',' << m << ',' << csv_num(cell.per_seed[i])
                       << ',' << csv_num(cell.per_seed_saving_pct[i]) << "\n";
                }
    }
    return matrix;
}

}  // namespace dcsim
