#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcsim/errors.hpp"

namespace dcsim {

using VmId = std::uint32_t;
using ServerId = std::uint32_t;
using RackId = std::uint32_t;

// Fixed resources of a VM. Ids are dense integers, assigned once and never
// reused after the VM departs.
struct VmSpec {
    VmId id = 0;
    int capacity_mips = 0;
    int memory_mb = 0;
    int storage_gb = 0;

    bool operator==(const VmSpec&) const = default;
};

// Per-epoch CPU request of a VM. 0 < requested_mips <= capacity_mips.
struct VmDemand {
    VmId vm_id = 0;
    int requested_mips = 0;

    bool operator==(const VmDemand&) const = default;
};

enum class ServerPowerState { On, Sleep };

// Physical server descriptor. Runtime power state lives in DatacenterState.
struct Server {
    ServerId id = 0;
    RackId rack_id = 0;
    int capacity_mips = 0;
    int memory_mb = 0;
    int storage_gb = 0;
    int nic_bandwidth_mbps = 0;
    double p_max_watts = 0.0;
    double k_idle_fraction = 0.0;  // idle power as a fraction of p_max
};

struct Rack {
    RackId id = 0;
    std::vector<ServerId> server_ids;
    double tor_switch_power_watts = 0.0;
    double cooling_power_watts = 0.0;
};

struct AggregateSwitch {
    std::vector<RackId> rack_ids;
    double power_watts = 0.0;
};

struct Topology {
    std::vector<Rack> racks;
    std::vector<AggregateSwitch> aggregate_switches;
    double core_router_power_watts = 0.0;
    std::vector<Server> servers;  // indexed by ServerId

    std::size_t server_count() const { return servers.size(); }
    std::size_t rack_count() const { return racks.size(); }

    const Server& server(ServerId id) const {
        if (id >= servers.size())
            throw LookupError("unknown server id " + std::to_string(id));
        return servers[id];
    }

    const Rack& rack(RackId id) const {
        if (id >= racks.size())
            throw LookupError("unknown rack id " + std::to_string(id));
        return racks[id];
    }

    long long total_capacity_mips() const {
        long long sum = 0;
        for (const auto& s : servers) sum += s.capacity_mips;
        return sum;
    }
};

// CPU utilization band used for both servers and racks.
struct Thresholds {
    double lower_utilization = 0.4;
    double upper_utilization = 0.8;

    void validate() const {
        if (!(lower_utilization > 0.0 && lower_utilization < upper_utilization &&
              upper_utilization < 1.0))
            throw ValidationError("thresholds must satisfy 0 < lower < upper < 1");
    }
};

// Checks structural invariants: dense ids, every server in exactly one rack,
// every rack behind exactly one aggregate switch, positive resources.
inline void validate_topology(const Topology& topo) {
    std::vector<int> server_rack_refs(topo.servers.size(), 0);
    std::vector<int> rack_agg_refs(topo.racks.size(), 0);

    for (std::size_t i = 0; i < topo.servers.size(); ++i) {
        const Server& s = topo.servers[i];
        if (s.id != i) throw ValidationError("server ids must be dense and ordered");
        if (s.capacity_mips <= 0 || s.memory_mb <= 0 || s.storage_gb <= 0)
            throw ValidationError("server " + std::to_string(s.id) + ": resources must be positive");
        if (s.p_max_watts <= 0.0)
            throw ValidationError("server " + std::to_string(s.id) + ": p_max_watts must be positive");
        if (s.k_idle_fraction < 0.0 || s.k_idle_fraction > 1.0)
            throw ValidationError("server " + std::to_string(s.id) + ": k_idle_fraction outside [0,1]");
        if (s.rack_id >= topo.racks.size())
            throw ValidationError("server " + std::to_string(s.id) + ": unknown rack");
    }
    for (std::size_t r = 0; r < topo.racks.size(); ++r) {
        const Rack& rack = topo.racks[r];
        if (rack.id != r) throw ValidationError("rack ids must be dense and ordered");
        for (ServerId sid : rack.server_ids) {
            if (sid >= topo.servers.size())
                throw ValidationError("rack " + std::to_string(rack.id) + ": unknown server");
            if (topo.servers[sid].rack_id != rack.id)
                throw ValidationError("server " + std::to_string(sid) + ": rack cross-reference mismatch");
            server_rack_refs[sid]++;
        }
    }
    for (const auto& agg : topo.aggregate_switches)
        for (RackId rid : agg.rack_ids) {
            if (rid >= topo.racks.size())
                throw ValidationError("aggregate switch references unknown rack");
            rack_agg_refs[rid]++;
        }
    for (std::size_t i = 0; i < server_rack_refs.size(); ++i)
        if (server_rack_refs[i] != 1)
            throw ValidationError("server " + std::to_string(i) + " must belong to exactly one rack");
    for (std::size_t i = 0; i < rack_agg_refs.size(); ++i)
        if (rack_agg_refs[i] != 1)
            throw ValidationError("rack " + std::to_string(i) + " must belong to exactly one aggregate switch");
}

}  // namespace dcsim
