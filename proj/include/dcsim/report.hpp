#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcsim/engine.hpp"
#include "dcsim/errors.hpp"

namespace dcsim {

inline constexpr const char* kReportSchema = "dcsim-report-1";
inline constexpr const char* kEpochCsvSchema = "# dcsim-epochs-1";
inline constexpr const char* kMigrationCsvSchema = "# dcsim-migrations-1";
inline constexpr const char* kSeriesCsvSchema = "# dcsim-series-1";

// Fixed-format float for CSV cells; printf keeps the bytes deterministic.
inline std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open output file: " + path.string());
    return os;
}

inline nlohmann::ordered_json report_to_json(const SimulationReport& rep) {
    nlohmann::ordered_json j;
    j["schema"] = kReportSchema;
    j["algorithm"] = rep.algorithm;
    j["seed"] = rep.seed;
    j["epochs"] = rep.epochs.size();
    j["epoch_seconds"] = rep.epoch_seconds;
    j["energy_joules"] = {
        {"servers", rep.energy_servers_j},   {"cooling", rep.energy_cooling_j},
        {"tor", rep.energy_tor_j},           {"aggregate", rep.energy_aggregate_j},
        {"core", rep.energy_core_j},         {"network", rep.energy_network_j},
        {"total", rep.energy_total_j},
    };
    j["energy_watt_hours"] = {
        {"servers", EnergyLedger::to_watt_hours(rep.energy_servers_j)},
        {"cooling", EnergyLedger::to_watt_hours(rep.energy_cooling_j)},
        {"network", EnergyLedger::to_watt_hours(rep.energy_network_j)},
        {"total", EnergyLedger::to_watt_hours(rep.energy_total_j)},
    };
    j["avg_active_servers"] = rep.avg_active_servers;
    j["avg_active_racks"] = rep.avg_active_racks;
    j["total_migrations"] = rep.total_migrations;
    j["sla"] = {
        {"violation_events", rep.sla.violation_events},
        {"vm_epoch_frames", rep.sla.vm_epoch_frames},
        {"violation_rate", rep.sla.violation_rate()},
    };
    j["residual_overload_server_epochs"] = rep.residual_overload_server_epochs;
    j["unplaced_vm_epochs"] = rep.unplaced_vm_epochs;
    return j;
}

inline void write_report_json(const SimulationReport& rep, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << report_to_json(rep).dump(2) << "\n";
}

inline void write_epoch_csv(const SimulationReport& rep, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << kEpochCsvSchema << "\n";
    os << "epoch,servers_w,tor_w,aggregate_w,core_w,network_w,cooling_w,total_w,"
          "active_servers,active_racks,migrations,sla_events,live_vms,unplaced_vms,"
          "residual_overloaded_servers\n";
    for (const EpochRow& r : rep.epochs) {
        os << r.epoch << ',' << csv_num(r.power.servers_watts) << ',' << csv_num(r.power.tor_watts)
           << ',' << csv_num(r.power.aggregate_watts) << ',' << csv_num(r.power.core_watts) << ','
           << csv_num(r.power.network_watts()) << ',' << csv_num(r.power.cooling_watts) << ','
           << csv_num(r.power.total_watts()) << ',' << r.active_servers << ',' << r.active_racks
           << ',' << r.migrations << ',' << r.sla_events << ',' << r.live_vms << ','
           << r.unplaced_vms << ',' << r.residual_overloaded_servers << "\n";
    }
}

inline void write_migration_csv(const SimulationReport& rep, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << kMigrationCsvSchema << "\n";
    os << "epoch,vm_id,from_server,to_server,reason,modeled_seconds\n";
    for (const MigrationRecord& m : rep.migration_log)
        os << m.epoch << ',' << m.vm << ',' << m.from << ',' << m.to << ',' << to_string(m.reason)
           << ',' << csv_num(m.modeled_seconds) << "\n";
}

// The per-figure metric series: one CSV per metric with a
// (seed, algorithm, value) row per run.
inline void emit_plot_series(const std::vector<SimulationReport>& reports,
                             const std::filesystem::path& dir) {
    struct Metric {
        const char* name;
        double (*get)(const SimulationReport&);
    };
    static const Metric metrics[] = {
        {"avg_active_servers", [](const SimulationReport& r) { return r.avg_active_servers; }},
        {"energy_servers_wh",
         [](const SimulationReport& r) { return EnergyLedger::to_watt_hours(r.energy_servers_j); }},
        {"avg_active_racks", [](const SimulationReport& r) { return r.avg_active_racks; }},
        {"energy_network_wh",
         [](const SimulationReport& r) { return EnergyLedger::to_watt_hours(r.energy_network_j); }},
        {"energy_cooling_wh",
         [](const SimulationReport& r) { return EnergyLedger::to_watt_hours(r.energy_cooling_j); }},
        {"energy_total_wh",
         [](const SimulationReport& r) { return EnergyLedger::to_watt_hours(r.energy_total_j); }},
        {"migrations",
         [](const SimulationReport& r) { return static_cast<double>(r.total_migrations); }},
        {"sla_violation_pct",
         [](const SimulationReport& r) { return 100.0 * r.sla.violation_rate(); }},
    };

    std::vector<const SimulationReport*> ordered;
    ordered.reserve(reports.size());
    for (const auto& r : reports) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
        if (a->algorithm != b->algorithm) return a->algorithm < b->algorithm;
        return a->seed < b->seed;
    });

    std::filesystem::create_directories(dir);
    for (const Metric& m : metrics) {
        auto os = open_out(dir / ("series_" + std::string(m.name) + ".csv"));
        os << kSeriesCsvSchema << "\n";
        os << "seed,algorithm,value\n";
        for (const SimulationReport* r : ordered)
            os << r->seed << ',' << r->algorithm << ',' << csv_num(m.get(*r)) << "\n";
    }
}

}  // namespace dcsim
