#pragma once

// Exhaustive-search oracle for micro placement instances. Independent of the
// library's search code: it re-derives feasibility and the power objective
// from the raw model so algorithm bugs cannot hide in shared helpers.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dcsim/dcsim.hpp"
#include "test_util.hpp"

namespace oracle {

struct MicroVm {
    dcsim::VmSpec spec;
    int demand = 0;
};

struct MicroInstance {
    dcsim::Topology topo;
    std::vector<MicroVm> vms;
};

struct OracleResult {
    double min_server_power = 0.0;
    std::vector<int> assignment;  // vm index -> server index
};

// Minimum total server power over all full assignments that respect memory,
// storage and the upper utilization threshold. nullopt when no assignment
// places every VM.
inline std::optional<OracleResult> brute_force_min_power(const MicroInstance& inst,
                                                         const dcsim::Thresholds& t) {
    const std::size_t n = inst.vms.size();
    const std::size_t k = inst.topo.servers.size();
    if (k == 0) return std::nullopt;

    std::optional<OracleResult> best;
    std::vector<int> assign(n, 0);

    const std::size_t total = [&] {
        std::size_t c = 1;
        for (std::size_t i = 0; i < n; ++i) c *= k;
        return c;
    }();

    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rest = code;
        for (std::size_t i = 0; i < n; ++i) {
            assign[i] = static_cast<int>(rest % k);
            rest /= k;
        }
        std::vector<long long> mips(k, 0), mem(k, 0), sto(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            mips[assign[i]] += inst.vms[i].demand;
            mem[assign[i]] += inst.vms[i].spec.memory_mb;
            sto[assign[i]] += inst.vms[i].spec.storage_gb;
        }
        bool feasible = true;
        double power = 0.0;
        for (std::size_t s = 0; s < k && feasible; ++s) {
            const dcsim::Server& server = inst.topo.servers[s];
            if (mem[s] > server.memory_mb || sto[s] > server.storage_gb) {
                feasible = false;
                break;
            }
            const double u = static_cast<double>(mips[s]) / server.capacity_mips;
            if (u > t.upper_utilization) {
                feasible = false;
                break;
            }
            if (mips[s] > 0)
                power += server.k_idle_fraction * server.p_max_watts +
                         (1.0 - server.k_idle_fraction) * server.p_max_watts * u;
        }
        if (!feasible) continue;
        if (!best || power < best->min_server_power) best = OracleResult{power, assign};
    }
    return best;
}

// Total Eq-1 power of the On servers in a state, recomputed from scratch.
inline double total_server_power(const dcsim::DatacenterState& state) {
    double power = 0.0;
    for (const dcsim::Server& s : state.topology().servers) {
        if (state.server_state(s.id) != dcsim::ServerPowerState::On) continue;
        const double u =
            std::min(1.0, static_cast<double>(state.used_mips(s.id)) / s.capacity_mips);
        power += s.k_idle_fraction * s.p_max_watts + (1.0 - s.k_idle_fraction) * s.p_max_watts * u;
    }
    return power;
}

// Random micro instance with <=3 servers and <=6 VMs, re-drawn until the
// oracle can place every VM.
inline MicroInstance random_feasible_instance(dcsim::Rng& rng, const dcsim::Thresholds& t) {
    static const int caps[] = {250, 500, 750, 1000};
    for (;;) {
        MicroInstance inst;
        const int racks = rng.uniform_int(1, 2);
        const int total_servers = rng.uniform_int(racks, 3);
        testutil::TopologyParams params;
        params.racks = racks;
        params.servers_per_rack = 1;
        inst.topo = testutil::make_topology(params);
        // Distribute the remaining servers over the racks.
        while (static_cast<int>(inst.topo.servers.size()) < total_servers) {
            dcsim::Server server = inst.topo.servers.back();
            server.id = static_cast<dcsim::ServerId>(inst.topo.servers.size());
            server.rack_id = static_cast<dcsim::RackId>(rng.uniform_int(0, racks - 1));
            inst.topo.racks[server.rack_id].server_ids.push_back(server.id);
            inst.topo.servers.push_back(server);
        }
        const int n = rng.uniform_int(1, 6);
        for (int i = 0; i < n; ++i) {
            const int cap = caps[rng.uniform_below(4)];
            MicroVm vm;
            vm.spec = testutil::vm_spec(static_cast<dcsim::VmId>(i), cap);
            vm.demand = rng.uniform_int(1, cap);
            inst.vms.push_back(vm);
        }
        if (brute_force_min_power(inst, t)) return inst;
    }
}

// Replays an OBFD outcome decision by decision and verifies the tier rule:
// an empty target implies no busy server fit, and an underutilized target
// implies no busy server fit either.
inline bool obfd_tier_discipline_ok(dcsim::DatacenterState replay,
                                    const dcsim::PlacementOutcome& outcome,
                                    const dcsim::Thresholds& t) {
    for (const dcsim::PlacementDecision& d : outcome.decisions) {
        for (const dcsim::Server& s : replay.topology().servers) {
            const dcsim::ServerClass cls = replay.classify_server(s.id, t);
            const bool could_fit = replay.fits(s.id, d.vm, t);
            if (!could_fit) continue;
            if (d.target_class_before == dcsim::ServerClass::Empty &&
                (cls == dcsim::ServerClass::Normal || cls == dcsim::ServerClass::Overloaded ||
                 cls == dcsim::ServerClass::Underutilized))
                return false;
            if (d.target_class_before == dcsim::ServerClass::Underutilized &&
                (cls == dcsim::ServerClass::Normal || cls == dcsim::ServerClass::Overloaded))
                return false;
        }
        if (d.woke_server) replay.wake(d.server);
        replay.place(d.vm, d.server);
    }
    return true;
}

}  // namespace oracle
