#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcsim/migration.hpp"
#include "dcsim/model.hpp"
#include "dcsim/placement.hpp"
#include "dcsim/power.hpp"
#include "dcsim/types.hpp"
#include "dcsim/workload.hpp"

namespace dcsim {

struct EngineOptions {
    double epoch_seconds = 300.0;
    MigrationCostModel cost_model{};
    // Internal consistency sweep frequency. EveryEpoch is the debug/fuzz
    // setting; EndOnly checks once after the final epoch.
    enum class Checks { None, EndOnly, EveryEpoch };
    Checks checks = Checks::EndOnly;
    // Server-level evacuation suits the rack-blind algorithms, rack-level the
    // rack-aware ones; unset picks by algorithm.
    std::optional<bool> rack_level_evacuation;
};

struct SlaAccounting {
    long long violation_events = 0;
    long long vm_epoch_frames = 0;

    double violation_rate() const {
        return static_cast<double>(violation_events) /
               static_cast<double>(std::max<long long>(1, vm_epoch_frames));
    }
};

struct EpochRow {
    int epoch = 0;
    PowerBreakdown power;
    double epoch_seconds = 0.0;
    int active_servers = 0;
    int active_racks = 0;
    int migrations = 0;
    long long sla_events = 0;
    int live_vms = 0;
    int unplaced_vms = 0;
    int departures = 0;
    int demand_drops = 0;
    int demand_rises = 0;
    int arrivals = 0;
    int residual_overloaded_servers = 0;
};

struct MigrationRecord {
    int epoch = 0;
    VmId vm = 0;
    ServerId from = 0;
    ServerId to = 0;
    MigrationReason reason = MigrationReason::Overload;
    double modeled_seconds = 0.0;
};

struct SimulationReport {
    std::string algorithm;
    std::uint64_t seed = 0;
    double epoch_seconds = 0.0;
    std::vector<EpochRow> epochs;
    std::vector<MigrationRecord> migration_log;

    // Cumulative energy; each component is the running sum of its per-epoch
    // watts x seconds contributions, in row order.
    double energy_servers_j = 0.0;
    double energy_cooling_j = 0.0;
    double energy_tor_j = 0.0;
    double energy_aggregate_j = 0.0;
    double energy_core_j = 0.0;
    double energy_network_j = 0.0;
    double energy_total_j = 0.0;

    double avg_active_servers = 0.0;
    double avg_active_racks = 0.0;
    long long total_migrations = 0;
    SlaAccounting sla;
    long long residual_overload_server_epochs = 0;
    long long unplaced_vm_epochs = 0;
};

// One simulation run: owns the datacenter state and folds epochs through the
// pipeline of apply-events, evict, place, evacuate, sleep, account, integrate.
class Simulation {
public:
    Simulation(Topology topo, Thresholds thresholds, Algorithm algorithm,
               EngineOptions options = {})
        : state_(std::move(topo)),
          thresholds_(thresholds),
          algorithm_(algorithm),
          options_(options) {
        thresholds_.validate();
        if (options_.epoch_seconds <= 0.0)
            throw std::invalid_argument("epoch_seconds must be positive");
    }

    const DatacenterState& state() const { return state_; }
    DatacenterState& mutable_state() { return state_; }
    int epoch_index() const { return epoch_index_; }
    const EnergyLedger& ledger() const { return ledger_; }

    void run_epoch(const EpochEvents& events) {
        if (events.epoch != epoch_index_)
            throw ContractError("events for epoch " + std::to_string(events.epoch) +
                                " fed to epoch " + std::to_string(epoch_index_));
        EpochRow row;
        row.epoch = epoch_index_;
        row.epoch_seconds = options_.epoch_seconds;

        const std::size_t live_before = state_.live_vm_count();

        // 1. Departures free their resources immediately.
        for (VmId vm : events.departures) state_.remove_vm(vm);
        row.departures = static_cast<int>(events.departures.size());

        // 2. Demand updates.
        for (const auto& [vm, mips] : events.demand_updates) {
            const int old = state_.vm(vm).requested_mips;
            if (mips < old)
                ++row.demand_drops;
            else if (mips > old)
                ++row.demand_rises;
            state_.set_demand(vm, mips);
        }

        // 3. Select and detach evictions from every overloaded server.
        std::map<VmId, ServerId> evicted_origin;
        for (const Server& s : state_.topology().servers) {
            if (state_.classify_server(s.id, thresholds_) != ServerClass::Overloaded) continue;
            for (VmId vm : select_overload_evictions(state_, s.id, thresholds_)) {
                state_.unplace(vm);
                evicted_origin.emplace(vm, s.id);
            }
        }

        // 4. Admit arrivals; the placement request is every unhosted VM:
        //    evictions, arrivals, and the retry queue from earlier epochs.
        for (const Arrival& a : events.arrivals) state_.admit_vm(a.spec, a.requested_mips);
        row.arrivals = static_cast<int>(events.arrivals.size());
        const std::vector<VmId> request = state_.unplaced_vms();

        // 5. Placement pass.
        std::vector<Move> epoch_moves;
        std::set<VmId> pinned;
        const PlacementOutcome outcome = place_vms(state_, algorithm_, request, thresholds_);
        for (const auto& [vm, server] : outcome.placed) {
            auto it = evicted_origin.find(vm);
            if (it != evicted_origin.end() && it->second != server) {
                epoch_moves.push_back({vm, it->second, server, MigrationReason::Overload, 0.0});
                pinned.insert(vm);
            }
        }
        // Evicted VMs that found no new home return to their origin server.
        for (VmId vm : outcome.unplaced) {
            auto it = evicted_origin.find(vm);
            if (it == evicted_origin.end()) continue;
            const ServerId origin = it->second;
            const Server& s = state_.topology().server(origin);
            const VmRecord& rec = state_.vm(vm);
            if (state_.free_memory_mb(origin) >= rec.spec.memory_mb &&
                state_.free_storage_gb(origin) >= rec.spec.storage_gb) {
                state_.place(vm, origin);
            }
        }

        // 6. Evacuate underutilized servers or racks, per algorithm family.
        const bool rack_level = options_.rack_level_evacuation.value_or(
            algorithm_ == Algorithm::Rbr || algorithm_ == Algorithm::Nur ||
            algorithm_ == Algorithm::Omur);
        const MigrationPlan evac =
            rack_level ? evacuate_underutilized_racks_pass(state_, algorithm_, thresholds_, pinned)
                       : evacuate_underutilized_servers_pass(state_, algorithm_, thresholds_,
                                                             pinned);
        for (const Move& m : evac.moves) {
            epoch_moves.push_back(m);
            pinned.insert(m.vm);
        }

        // 7. Empty servers sleep at epoch end.
        for (const Server& s : state_.topology().servers)
            if (state_.server_state(s.id) == ServerPowerState::On &&
                state_.hosted_vms(s.id).empty())
                state_.sleep(s.id);

        // 8. SLA accounting over the post-pipeline state. Every VM on a
        //    server whose summed request exceeds capacity is shorted, as is
        //    every VM still waiting in the queue.
        sla_.vm_epoch_frames += static_cast<long long>(state_.live_vm_count());
        for (const Server& s : state_.topology().servers) {
            if (state_.server_state(s.id) != ServerPowerState::On) continue;
            if (state_.used_mips(s.id) > s.capacity_mips)
                row.sla_events += static_cast<long long>(state_.hosted_vms(s.id).size());
            if (state_.classify_server(s.id, thresholds_) == ServerClass::Overloaded)
                ++row.residual_overloaded_servers;
        }
        const std::vector<VmId> still_unplaced = state_.unplaced_vms();
        row.sla_events += static_cast<long long>(still_unplaced.size());
        sla_.violation_events += row.sla_events;
        row.unplaced_vms = static_cast<int>(still_unplaced.size());
        residual_overload_server_epochs_ += row.residual_overloaded_servers;
        unplaced_vm_epochs_ += row.unplaced_vms;

        // 9. Migration log and the epoch's power sample.
        const int concurrency = static_cast<int>(epoch_moves.size());
        for (Move& m : epoch_moves) {
            m.modeled_seconds =
                migration_time_seconds(state_.vm(m.vm).spec, options_.cost_model, concurrency);
            migration_log_.push_back(
                {epoch_index_, m.vm, m.from, m.to, m.reason, m.modeled_seconds});
        }
        row.migrations = concurrency;
        total_migrations_ += concurrency;

        row.power = datacenter_power(state_);
        ledger_.accumulate(row.power, options_.epoch_seconds);
        row.active_servers = state_.active_server_count();
        row.active_racks = state_.active_rack_count();
        row.live_vms = static_cast<int>(state_.live_vm_count());
        rows_.push_back(row);

        // 10. Advance.
        ++epoch_index_;

        const std::size_t live_after = state_.live_vm_count();
        if (live_after != live_before + events.arrivals.size() - events.departures.size())
            throw ContractError("VM conservation violated in epoch " +
                                std::to_string(row.epoch));
        if (options_.checks == EngineOptions::Checks::EveryEpoch) check_invariants();
    }

    // Structural sweep: aggregates match the VM table, sleeping servers host
    // nothing, placements point at On servers, hard capacities hold, and the
    // power sample identities are intact.
    void check_invariants() const {
        const Topology& topo = state_.topology();
        std::vector<long long> mips(topo.server_count(), 0);
        std::vector<long long> mem(topo.server_count(), 0);
        std::vector<long long> sto(topo.server_count(), 0);
        std::size_t placed = 0;
        for (const auto& [id, rec] : state_.vms()) {
            const auto host = state_.host_of(id);
            if (!host) continue;
            ++placed;
            if (state_.server_state(*host) != ServerPowerState::On)
                throw ContractError("vm " + std::to_string(id) + " placed on sleeping server");
            if (!state_.hosted_vms(*host).count(id))
                throw ContractError("host index out of sync for vm " + std::to_string(id));
            mips[*host] += rec.requested_mips;
            mem[*host] += rec.spec.memory_mb;
            sto[*host] += rec.spec.storage_gb;
        }
        std::size_t hosted_total = 0;
        for (const Server& s : topo.servers) {
            hosted_total += state_.hosted_vms(s.id).size();
            if (state_.server_state(s.id) == ServerPowerState::Sleep &&
                !state_.hosted_vms(s.id).empty())
                throw ContractError("sleeping server " + std::to_string(s.id) + " hosts VMs");
            if (mips[s.id] != state_.used_mips(s.id))
                throw ContractError("mips aggregate mismatch on server " + std::to_string(s.id));
            if (mem[s.id] != s.memory_mb - state_.free_memory_mb(s.id) ||
                sto[s.id] != s.storage_gb - state_.free_storage_gb(s.id))
                throw ContractError("memory/storage aggregate mismatch on server " +
                                    std::to_string(s.id));
            if (mem[s.id] > s.memory_mb || sto[s.id] > s.storage_gb)
                throw ContractError("hard capacity exceeded on server " + std::to_string(s.id));
        }
        if (hosted_total != placed)
            throw ContractError("hosted index does not match placement map");

        const PowerBreakdown b = datacenter_power(state_);
        if (b.total_watts() !=
            b.servers_watts + b.cooling_watts + b.tor_watts + b.aggregate_watts + b.core_watts)
            throw ContractError("power breakdown identity broken");
        for (const Rack& r : topo.racks) {
            if (!state_.rack_active(r.id)) {
                for (ServerId sid : r.server_ids)
                    if (state_.server_state(sid) == ServerPowerState::On)
                        throw ContractError("inactive rack with an On server");
            }
        }
    }

    SimulationReport report() const {
        SimulationReport rep;
        rep.algorithm = std::string(to_string(algorithm_));
        rep.epoch_seconds = options_.epoch_seconds;
        rep.epochs = rows_;
        rep.migration_log = migration_log_;
        rep.energy_servers_j = ledger_.servers_joules();
        rep.energy_cooling_j = ledger_.cooling_joules();
        rep.energy_tor_j = ledger_.tor_joules();
        rep.energy_aggregate_j = ledger_.aggregate_joules();
        rep.energy_core_j = ledger_.core_joules();
        rep.energy_network_j = ledger_.network_joules();
        rep.energy_total_j = ledger_.total_joules();
        if (!rows_.empty()) {
            double servers = 0.0, racks = 0.0;
            for (const EpochRow& r : rows_) {
                servers += r.active_servers;
                racks += r.active_racks;
            }
            rep.avg_active_servers = servers / static_cast<double>(rows_.size());
            rep.avg_active_racks = racks / static_cast<double>(rows_.size());
        }
        rep.total_migrations = total_migrations_;
        rep.sla = sla_;
        rep.residual_overload_server_epochs = residual_overload_server_epochs_;
        rep.unplaced_vm_epochs = unplaced_vm_epochs_;
        return rep;
    }

private:
    DatacenterState state_;
    Thresholds thresholds_;
    Algorithm algorithm_;
    EngineOptions options_;
    int epoch_index_ = 0;
    EnergyLedger ledger_;
    SlaAccounting sla_;
    std::vector<EpochRow> rows_;
    std::vector<MigrationRecord> migration_log_;
    long long total_migrations_ = 0;
    long long residual_overload_server_epochs_ = 0;
    long long unplaced_vm_epochs_ = 0;
};

// Rejects traces whose VMs could never sit on any server of the topology.
inline void validate_trace_against_topology(const Trace& trace, const Topology& topo) {
    for (const EpochEvents& ev : trace.epochs)
        for (const Arrival& a : ev.arrivals) {
            bool fits_somewhere = false;
            for (const Server& s : topo.servers)
                if (a.spec.capacity_mips <= s.capacity_mips && a.spec.memory_mb <= s.memory_mb &&
                    a.spec.storage_gb <= s.storage_gb) {
                    fits_somewhere = true;
                    break;
                }
            if (!fits_somewhere)
                throw ValidationError("trace/topology mismatch: vm " + std::to_string(a.spec.id) +
                                      " does not fit any server");
        }
}

inline SimulationReport run_simulation(const Topology& topo, const Thresholds& thresholds,
                                       Algorithm algorithm, const Trace& trace,
                                       EngineOptions options = {}) {
    if (trace.epochs.empty()) throw ValidationError("trace must contain at least one epoch");
    validate_trace_against_topology(trace, topo);
    Simulation sim(topo, thresholds, algorithm, options);
    for (const EpochEvents& ev : trace.epochs) sim.run_epoch(ev);
    if (options.checks != EngineOptions::Checks::None) sim.check_invariants();
    SimulationReport rep = sim.report();
    rep.seed = trace.seed;
    return rep;
}

}  // namespace dcsim
