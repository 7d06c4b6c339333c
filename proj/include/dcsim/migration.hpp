#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcsim/model.hpp"
#include "dcsim/placement.hpp"
#include "dcsim/types.hpp"

namespace dcsim {

enum class MigrationReason { Overload, UnderutilizedServer, UnderutilizedRack };

inline const char* to_string(MigrationReason r) {
    switch (r) {
        case MigrationReason::Overload: return "overload";
        case MigrationReason::UnderutilizedServer: return "underutilized_server";
        case MigrationReason::UnderutilizedRack: return "underutilized_rack";
    }
    return "?";
}

struct Move {
    VmId vm = 0;
    ServerId from = 0;
    ServerId to = 0;
    MigrationReason reason = MigrationReason::Overload;
    double modeled_seconds = 0.0;  // filled once the epoch's concurrency is known
};

struct MigrationPlan {
    std::vector<Move> moves;
};

// VM disks live on network-attached storage, so a migration copies memory
// only; concurrent moves share the bandwidth evenly.
struct MigrationCostModel {
    bool nas_assumed = true;
    double effective_bandwidth_mbps = 1000.0;
};

// Memory transfer time in seconds. Decimal units: 1 MB = 10^6 bytes,
// 1 Mbit/s = 10^6 bits per second.
inline double migration_time_seconds(const VmSpec& vm, const MigrationCostModel& model,
                                     int concurrent_moves) {
    if (model.effective_bandwidth_mbps <= 0.0)
        throw std::invalid_argument("effective bandwidth must be positive");
    if (concurrent_moves < 1)
        throw std::invalid_argument("concurrent_moves must be at least 1");
    const double bits = static_cast<double>(vm.memory_mb) * 1e6 * 8.0;
    const double rate = model.effective_bandwidth_mbps * 1e6 / concurrent_moves;
    return bits / rate;
}

// Minimization-of-migrations selection for one overloaded server: while the
// utilization exceeds the upper threshold, evict the VM whose removal lands
// utilization closest below the threshold; when no single VM suffices, evict
// the largest request and retry. Pure; returns ids in eviction order.
inline std::vector<VmId> select_overload_evictions(const DatacenterState& state, ServerId server,
                                                   const Thresholds& t) {
    if (state.classify_server(server, t) != ServerClass::Overloaded)
        throw ContractError("server " + std::to_string(server) + " is not overloaded");

    struct Entry {
        VmId vm;
        int demand;
    };
    std::vector<Entry> remaining;
    for (VmId vm : state.hosted_vms(server))
        remaining.push_back({vm, state.vm(vm).requested_mips});

    const double capacity = state.topology().server(server).capacity_mips;
    long long total = state.used_mips(server);
    std::vector<VmId> evictions;

    while (static_cast<double>(total) / capacity > t.upper_utilization && !remaining.empty()) {
        std::optional<std::size_t> pick;
        double best_gap = 0.0;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            const double after = static_cast<double>(total - remaining[i].demand) / capacity;
            if (after > t.upper_utilization) continue;
            const double gap = t.upper_utilization - after;
            if (!pick || gap < best_gap) {
                pick = i;
                best_gap = gap;
            }
        }
        if (!pick) {
            // No single removal suffices: take the highest request.
            std::size_t largest = 0;
            for (std::size_t i = 1; i < remaining.size(); ++i)
                if (remaining[i].demand > remaining[largest].demand) largest = i;
            pick = largest;
        }
        evictions.push_back(remaining[*pick].vm);
        total -= remaining[*pick].demand;
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(*pick));
    }
    return evictions;
}

// All VMs hosted by underutilized servers, in server-id then vm-id order.
// Selection only; the engine drives the actual re-placement.
inline std::vector<VmId> evacuate_underutilized_servers(const DatacenterState& state,
                                                        const Thresholds& t) {
    std::vector<VmId> out;
    for (const Server& s : state.topology().servers)
        if (state.classify_server(s.id, t) == ServerClass::Underutilized)
            for (VmId vm : state.hosted_vms(s.id)) out.push_back(vm);
    return out;
}

namespace detail {

inline std::vector<VmId> by_demand_desc(const DatacenterState& state, std::vector<VmId> vms) {
    std::sort(vms.begin(), vms.end(), [&](VmId a, VmId b) {
        const int da = state.vm(a).requested_mips;
        const int db = state.vm(b).requested_mips;
        if (da != db) return da > db;
        return a < b;
    });
    return vms;
}

inline bool hosts_pinned(const DatacenterState& state, ServerId server,
                         const std::set<VmId>& pinned) {
    for (VmId vm : state.hosted_vms(server))
        if (pinned.count(vm)) return true;
    return false;
}

}  // namespace detail

// Drains every underutilized server through the algorithm's search over the
// other On servers; no server is woken for this. VMs with no target return to
// their origin, so the pass is not atomic per server. VMs in `pinned` were
// already migrated this epoch and are not touched again; servers hosting one
// are skipped.
inline MigrationPlan evacuate_underutilized_servers_pass(DatacenterState& state,
                                                         Algorithm algorithm,
                                                         const Thresholds& t,
                                                         const std::set<VmId>& pinned = {}) {
    MigrationPlan plan;
    for (const Server& s : state.topology().servers) {
        if (state.classify_server(s.id, t) != ServerClass::Underutilized) continue;
        if (detail::hosts_pinned(state, s.id, pinned)) continue;

        std::set<ServerId> allowed;
        for (const Server& other : state.topology().servers)
            if (other.id != s.id && state.server_state(other.id) == ServerPowerState::On)
                allowed.insert(other.id);

        const std::vector<VmId> vms = detail::by_demand_desc(
            state, {state.hosted_vms(s.id).begin(), state.hosted_vms(s.id).end()});
        for (VmId vm : vms) {
            state.unplace(vm);
            const auto target = search_target(state, algorithm, vm, t, allowed);
            if (target) {
                state.place(vm, *target);
                plan.moves.push_back({vm, s.id, *target, MigrationReason::UnderutilizedServer, 0.0});
            } else {
                state.place(vm, s.id);  // nowhere to go; stay
            }
        }
    }
    return plan;
}

// Evacuates each underutilized rack onto servers of non-underutilized racks,
// least utilized rack first. Per rack the evacuation is atomic: if any of its
// VMs finds no target, every tentative move of that rack is rolled back.
// On success all the rack's servers go to sleep.
inline MigrationPlan evacuate_underutilized_racks_pass(DatacenterState& state,
                                                       Algorithm algorithm, const Thresholds& t,
                                                       const std::set<VmId>& pinned = {}) {
    MigrationPlan plan;

    std::vector<RackId> order(state.topology().rack_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<RackId>(i);
    std::stable_sort(order.begin(), order.end(), [&](RackId a, RackId b) {
        return state.rack_utilization(a) < state.rack_utilization(b);
    });

    for (RackId rack : order) {
        if (!state.rack_active(rack)) continue;
        if (state.rack_utilization(rack) >= t.lower_utilization) continue;

        std::vector<VmId> rack_vms;
        bool blocked = false;
        for (ServerId sid : state.topology().rack(rack).server_ids) {
            if (detail::hosts_pinned(state, sid, pinned)) blocked = true;
            for (VmId vm : state.hosted_vms(sid)) rack_vms.push_back(vm);
        }
        if (blocked || rack_vms.empty()) continue;

        std::set<ServerId> targets;
        for (const Rack& other : state.topology().racks) {
            if (other.id == rack) continue;
            if (!state.rack_active(other.id)) continue;
            if (state.rack_utilization(other.id) < t.lower_utilization) continue;
            for (ServerId sid : other.server_ids) targets.insert(sid);
        }
        if (targets.empty()) continue;

        struct JournalEntry {
            VmId vm;
            ServerId from;
            ServerId to;
            bool woke;
        };
        std::vector<JournalEntry> journal;
        bool complete = true;

        for (VmId vm : detail::by_demand_desc(state, rack_vms)) {
            const ServerId origin = *state.host_of(vm);
            state.unplace(vm);
            const auto target = search_target(state, algorithm, vm, t, targets);
            if (!target) {
                state.place(vm, origin);
                complete = false;
                break;
            }
            const bool woke = state.server_state(*target) == ServerPowerState::Sleep;
            if (woke) state.wake(*target);
            state.place(vm, *target);
            journal.push_back({vm, origin, *target, woke});
        }

        if (!complete) {
            for (auto it = journal.rbegin(); it != journal.rend(); ++it) {
                state.unplace(it->vm);
                if (it->woke && state.hosted_vms(it->to).empty()) state.sleep(it->to);
                state.place(it->vm, it->from);
            }
            continue;
        }

        for (ServerId sid : state.topology().rack(rack).server_ids)
            if (state.server_state(sid) == ServerPowerState::On) state.sleep(sid);
        for (const JournalEntry& e : journal)
            plan.moves.push_back({e.vm, e.from, e.to, MigrationReason::UnderutilizedRack, 0.0});
    }
    return plan;
}

}  // namespace dcsim
