#pragma once

#include "dcsim/dcsim.hpp"

namespace testutil {

struct TopologyParams {
    int racks = 1;
    int servers_per_rack = 1;
    int capacity_mips = 2000;
    int memory_mb = 10240;
    int storage_gb = 1000;
    double p_max_watts = 250.0;
    double k_idle_fraction = 0.7;
    int aggregate_fanin = 4;
    double tor_watts = 366.0;
    double aggregate_watts = 405.0;
    double core_watts = 3500.0;
    double cooling_watts = 950.0;
};

inline dcsim::Topology make_topology(const TopologyParams& p = {}) {
    dcsim::Topology topo;
    dcsim::ServerId next = 0;
    for (int r = 0; r < p.racks; ++r) {
        dcsim::Rack rack;
        rack.id = static_cast<dcsim::RackId>(r);
        rack.tor_switch_power_watts = p.tor_watts;
        rack.cooling_power_watts = p.cooling_watts;
        for (int s = 0; s < p.servers_per_rack; ++s) {
            dcsim::Server server;
            server.id = next++;
            server.rack_id = rack.id;
            server.capacity_mips = p.capacity_mips;
            server.memory_mb = p.memory_mb;
            server.storage_gb = p.storage_gb;
            server.nic_bandwidth_mbps = 1000;
            server.p_max_watts = p.p_max_watts;
            server.k_idle_fraction = p.k_idle_fraction;
            rack.server_ids.push_back(server.id);
            topo.servers.push_back(server);
        }
        topo.racks.push_back(std::move(rack));
    }
    for (int r = 0; r < p.racks; r += p.aggregate_fanin) {
        dcsim::AggregateSwitch agg;
        agg.power_watts = p.aggregate_watts;
        for (int k = r; k < std::min(p.racks, r + p.aggregate_fanin); ++k)
            agg.rack_ids.push_back(static_cast<dcsim::RackId>(k));
        topo.aggregate_switches.push_back(std::move(agg));
    }
    topo.core_router_power_watts = p.core_watts;
    return topo;
}

inline dcsim::VmSpec vm_spec(dcsim::VmId id, int capacity, int memory_mb = 128,
                             int storage_gb = 1) {
    return dcsim::VmSpec{id, capacity, memory_mb, storage_gb};
}

// Admit a VM and pin it to a server, waking the server as needed. Bypasses
// the placement algorithms; for constructing test states.
inline void host_vm(dcsim::DatacenterState& state, dcsim::VmId id, int capacity, int demand,
                    dcsim::ServerId server) {
    state.admit_vm(vm_spec(id, capacity), demand);
    if (state.server_state(server) == dcsim::ServerPowerState::Sleep) state.wake(server);
    state.place(id, server);
}

}  // namespace testutil
