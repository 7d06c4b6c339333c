#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "dcsim/model.hpp"
#include "dcsim/types.hpp"

namespace dcsim {

// Linear server power model: idle fraction K of P_max plus a term
// proportional to CPU utilization. Overload does not draw beyond P_max; a
// sleeping server draws nothing.
inline double server_power_watts(const Server& server, ServerPowerState state,
                                 double utilization) {
    if (utilization < 0.0) throw std::invalid_argument("utilization must be non-negative");
    if (state == ServerPowerState::Sleep) return 0.0;
    const double u = std::min(utilization, 1.0);
    const double k = server.k_idle_fraction;
    return k * server.p_max_watts + (1.0 - k) * server.p_max_watts * u;
}

// Instantaneous datacenter power split by component. Aggregates are computed
// from the stored parts, never stored separately, so the breakdown identities
// hold exactly.
struct PowerBreakdown {
    double servers_watts = 0.0;
    double cooling_watts = 0.0;
    double tor_watts = 0.0;
    double aggregate_watts = 0.0;
    double core_watts = 0.0;

    double network_watts() const { return tor_watts + aggregate_watts + core_watts; }
    double total_watts() const { return servers_watts + cooling_watts + network_watts(); }

    bool operator==(const PowerBreakdown&) const = default;
};

struct NetworkPower {
    double tor_watts = 0.0;
    double aggregate_watts = 0.0;
    double core_watts = 0.0;

    double total() const { return tor_watts + aggregate_watts + core_watts; }
};

// A ToR switch draws power iff its rack is active; an aggregate switch iff
// any rack behind it is active; the core router iff any rack at all is
// active. Everything else contributes exactly zero.
inline NetworkPower network_power_watts(const DatacenterState& state) {
    const Topology& topo = state.topology();
    NetworkPower net;
    bool any_rack_active = false;
    for (const Rack& rack : topo.racks) {
        if (state.rack_active(rack.id)) {
            net.tor_watts += rack.tor_switch_power_watts;
            any_rack_active = true;
        }
    }
    for (const AggregateSwitch& agg : topo.aggregate_switches) {
        for (RackId rid : agg.rack_ids) {
            if (state.rack_active(rid)) {
                net.aggregate_watts += agg.power_watts;
                break;
            }
        }
    }
    if (any_rack_active) net.core_watts = topo.core_router_power_watts;
    return net;
}

// Rack-based cooling: each active rack's dedicated cooling unit draws its
// rated power; inactive racks draw nothing.
inline double cooling_power_watts(const DatacenterState& state) {
    double sum = 0.0;
    for (const Rack& rack : state.topology().racks)
        if (state.rack_active(rack.id)) sum += rack.cooling_power_watts;
    return sum;
}

inline PowerBreakdown datacenter_power(const DatacenterState& state) {
    PowerBreakdown out;
    const Topology& topo = state.topology();
    for (const Server& s : topo.servers)
        out.servers_watts += server_power_watts(s, state.server_state(s.id),
                                                state.server_utilization(s.id));
    out.cooling_watts = cooling_power_watts(state);
    const NetworkPower net = network_power_watts(state);
    out.tor_watts = net.tor_watts;
    out.aggregate_watts = net.aggregate_watts;
    out.core_watts = net.core_watts;
    return out;
}

struct EnergySample {
    PowerBreakdown power;
    double seconds = 0.0;
};

// Piecewise-constant discretization of the energy integral: one power sample
// per epoch, energy accumulated as watts times seconds per component.
class EnergyLedger {
public:
    void accumulate(const PowerBreakdown& power, double seconds) {
        if (seconds <= 0.0) throw std::invalid_argument("epoch duration must be positive");
        samples_.push_back({power, seconds});
        servers_j_ += power.servers_watts * seconds;
        cooling_j_ += power.cooling_watts * seconds;
        tor_j_ += power.tor_watts * seconds;
        aggregate_j_ += power.aggregate_watts * seconds;
        core_j_ += power.core_watts * seconds;
        network_j_ += power.network_watts() * seconds;
        total_j_ += power.total_watts() * seconds;
    }

    const std::vector<EnergySample>& samples() const { return samples_; }

    double servers_joules() const { return servers_j_; }
    double cooling_joules() const { return cooling_j_; }
    double tor_joules() const { return tor_j_; }
    double aggregate_joules() const { return aggregate_j_; }
    double core_joules() const { return core_j_; }
    double network_joules() const { return network_j_; }
    double total_joules() const { return total_j_; }

    static double to_watt_hours(double joules) { return joules / 3600.0; }

private:
    std::vector<EnergySample> samples_;
    double servers_j_ = 0.0;
    double cooling_j_ = 0.0;
    double tor_j_ = 0.0;
    double aggregate_j_ = 0.0;
    double core_j_ = 0.0;
    double network_j_ = 0.0;
    double total_j_ = 0.0;
};

}  // namespace dcsim
