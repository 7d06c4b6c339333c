#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcsim/errors.hpp"
#include "dcsim/types.hpp"

namespace dcsim {

enum class ServerClass { Empty, Underutilized, Normal, Overloaded };

inline const char* to_string(ServerClass c) {
    switch (c) {
        case ServerClass::Empty: return "empty";
        case ServerClass::Underutilized: return "underutilized";
        case ServerClass::Normal: return "normal";
        case ServerClass::Overloaded: return "overloaded";
    }
    return "?";
}

// A live VM: its fixed spec plus the MIPS it requests this epoch.
struct VmRecord {
    VmSpec spec;
    int requested_mips = 0;

    bool operator==(const VmRecord&) const = default;
};

// The central mutable state shared by all algorithms: the physical topology,
// per-server power states and load aggregates, and the VM population with its
// current placement. Memory and storage are hard capacities; requested MIPS
// may exceed CPU capacity (that is an SLA event, tracked by the engine).
//
// Value-semantic: copies are independent, which the comparison harness uses
// to run algorithms on identical starting states.
class DatacenterState {
public:
    explicit DatacenterState(Topology topo) : topo_(std::move(topo)) {
        validate_topology(topo_);
        const std::size_t n = topo_.servers.size();
        power_state_.assign(n, ServerPowerState::Sleep);
        used_mips_.assign(n, 0);
        used_memory_mb_.assign(n, 0);
        used_storage_gb_.assign(n, 0);
        hosted_.assign(n, {});
    }

    const Topology& topology() const { return topo_; }

    // --- VM population -----------------------------------------------------

    // Admits a VM with no host yet (the engine's unplaced pool).
    void admit_vm(const VmSpec& spec, int requested_mips) {
        if (spec.capacity_mips <= 0 || spec.memory_mb <= 0 || spec.storage_gb <= 0)
            throw std::invalid_argument("vm " + std::to_string(spec.id) +
                                        ": capacity, memory and storage must be positive");
        check_demand(spec, requested_mips);
        if (ever_admitted_.count(spec.id))
            throw ValidationError("vm id " + std::to_string(spec.id) + " reused");
        ever_admitted_.insert(spec.id);
        vms_.emplace(spec.id, VmRecord{spec, requested_mips});
    }

    void remove_vm(VmId id) {
        auto it = find_vm(id);
        if (auto host = host_of(id)) detach(id, *host);
        vms_.erase(it);
    }

    void set_demand(VmId id, int requested_mips) {
        auto it = find_vm(id);
        check_demand(it->second.spec, requested_mips);
        if (auto host = host_of(id)) {
            used_mips_[*host] += requested_mips - it->second.requested_mips;
        }
        it->second.requested_mips = requested_mips;
    }

    bool has_vm(VmId id) const { return vms_.count(id) != 0; }

    const VmRecord& vm(VmId id) const {
        auto it = vms_.find(id);
        if (it == vms_.end()) throw LookupError("unknown vm id " + std::to_string(id));
        return it->second;
    }

    // Ordered by id; iteration over this map is the deterministic VM order.
    const std::map<VmId, VmRecord>& vms() const { return vms_; }

    std::size_t live_vm_count() const { return vms_.size(); }

    // --- placement ---------------------------------------------------------

    void place(VmId id, ServerId server) {
        const VmRecord& rec = vm(id);
        check_server(server);
        if (host_.count(id))
            throw ContractError("vm " + std::to_string(id) + " is already placed");
        if (power_state_[server] != ServerPowerState::On)
            throw ContractError("placement target " + std::to_string(server) + " is asleep");
        const Server& s = topo_.servers[server];
        if (used_memory_mb_[server] + rec.spec.memory_mb > s.memory_mb ||
            used_storage_gb_[server] + rec.spec.storage_gb > s.storage_gb)
            throw ContractError("placement on server " + std::to_string(server) +
                                " violates memory/storage capacity");
        host_[id] = server;
        hosted_[server].insert(id);
        used_mips_[server] += rec.requested_mips;
        used_memory_mb_[server] += rec.spec.memory_mb;
        used_storage_gb_[server] += rec.spec.storage_gb;
    }

    void unplace(VmId id) {
        auto host = host_of(id);
        if (!host) throw ContractError("vm " + std::to_string(id) + " is not placed");
        detach(id, *host);
    }

    std::optional<ServerId> host_of(VmId id) const {
        auto it = host_.find(id);
        if (it == host_.end()) return std::nullopt;
        return it->second;
    }

    // Snapshot of the vm -> server map.
    std::map<VmId, ServerId> allocation() const { return host_; }

    // VMs admitted but not placed anywhere, ascending id.
    std::vector<VmId> unplaced_vms() const {
        std::vector<VmId> out;
        for (const auto& [id, rec] : vms_)
            if (!host_.count(id)) out.push_back(id);
        return out;
    }

    const std::set<VmId>& hosted_vms(ServerId server) const {
        check_server(server);
        return hosted_[server];
    }

    // --- power state -------------------------------------------------------

    ServerPowerState server_state(ServerId server) const {
        check_server(server);
        return power_state_[server];
    }

    void wake(ServerId server) {
        check_server(server);
        power_state_[server] = ServerPowerState::On;
    }

    void sleep(ServerId server) {
        check_server(server);
        if (!hosted_[server].empty())
            throw ContractError("cannot sleep server " + std::to_string(server) +
                                " while it hosts VMs");
        power_state_[server] = ServerPowerState::Sleep;
    }

    bool rack_active(RackId rack) const {
        for (ServerId sid : topo_.rack(rack).server_ids)
            if (power_state_[sid] == ServerPowerState::On) return true;
        return false;
    }

    int active_server_count() const {
        int n = 0;
        for (auto st : power_state_)
            if (st == ServerPowerState::On) ++n;
        return n;
    }

    int active_rack_count() const {
        int n = 0;
        for (const auto& r : topo_.racks)
            if (rack_active(r.id)) ++n;
        return n;
    }

    // --- utilization and classification -------------------------------------

    int used_mips(ServerId server) const {
        check_server(server);
        return used_mips_[server];
    }

    int free_memory_mb(ServerId server) const {
        check_server(server);
        return topo_.servers[server].memory_mb - used_memory_mb_[server];
    }

    int free_storage_gb(ServerId server) const {
        check_server(server);
        return topo_.servers[server].storage_gb - used_storage_gb_[server];
    }

    // Requested MIPS over capacity; may exceed 1.0 under overload.
    double server_utilization(ServerId server) const {
        check_server(server);
        return static_cast<double>(used_mips_[server]) /
               static_cast<double>(topo_.servers[server].capacity_mips);
    }

    double utilization_after(ServerId server, int extra_mips) const {
        check_server(server);
        return static_cast<double>(used_mips_[server] + extra_mips) /
               static_cast<double>(topo_.servers[server].capacity_mips);
    }

    // Hosted demand over the rack's total capacity, Sleep servers included in
    // the denominator.
    double rack_utilization(RackId rack) const {
        const Rack& r = topo_.rack(rack);
        long long demand = 0;
        long long capacity = 0;
        for (ServerId sid : r.server_ids) {
            demand += used_mips_[sid];
            capacity += topo_.servers[sid].capacity_mips;
        }
        if (capacity == 0) return 0.0;
        return static_cast<double>(demand) / static_cast<double>(capacity);
    }

    ServerClass classify_server(ServerId server, const Thresholds& t) const {
        check_server(server);
        if (hosted_[server].empty()) return ServerClass::Empty;
        const double u = server_utilization(server);
        if (u < t.lower_utilization) return ServerClass::Underutilized;
        if (u > t.upper_utilization) return ServerClass::Overloaded;
        return ServerClass::Normal;
    }

    // True iff the server's memory/storage residuals accommodate the VM and
    // the post-placement CPU utilization stays at or below the upper threshold.
    // Power state is not considered; Sleep candidates are wakeable.
    bool fits(ServerId server, const VmRecord& rec, const Thresholds& t) const {
        check_server(server);
        const Server& s = topo_.servers[server];
        if (used_memory_mb_[server] + rec.spec.memory_mb > s.memory_mb) return false;
        if (used_storage_gb_[server] + rec.spec.storage_gb > s.storage_gb) return false;
        return utilization_after(server, rec.requested_mips) <= t.upper_utilization;
    }

    bool fits(ServerId server, VmId vm_id, const Thresholds& t) const {
        return fits(server, vm(vm_id), t);
    }

    bool operator==(const DatacenterState& other) const {
        return power_state_ == other.power_state_ && used_mips_ == other.used_mips_ &&
               used_memory_mb_ == other.used_memory_mb_ &&
               used_storage_gb_ == other.used_storage_gb_ && host_ == other.host_ &&
               vms_ == other.vms_;
    }

private:
    void check_server(ServerId server) const {
        if (server >= topo_.servers.size())
            throw LookupError("unknown server id " + std::to_string(server));
    }

    static void check_demand(const VmSpec& spec, int requested_mips) {
        if (requested_mips <= 0 || requested_mips > spec.capacity_mips)
            throw std::invalid_argument("vm " + std::to_string(spec.id) + ": requested " +
                                        std::to_string(requested_mips) + " MIPS outside (0, " +
                                        std::to_string(spec.capacity_mips) + "]");
    }

    std::map<VmId, VmRecord>::iterator find_vm(VmId id) {
        auto it = vms_.find(id);
        if (it == vms_.end()) throw LookupError("unknown vm id " + std::to_string(id));
        return it;
    }

    void detach(VmId id, ServerId server) {
        const VmRecord& rec = vms_.at(id);
        hosted_[server].erase(id);
        host_.erase(id);
        used_mips_[server] -= rec.requested_mips;
        used_memory_mb_[server] -= rec.spec.memory_mb;
        used_storage_gb_[server] -= rec.spec.storage_gb;
    }

    Topology topo_;
    std::vector<ServerPowerState> power_state_;
    std::vector<int> used_mips_;
    std::vector<int> used_memory_mb_;
    std::vector<int> used_storage_gb_;
    std::vector<std::set<VmId>> hosted_;
    std::map<VmId, ServerId> host_;
    std::map<VmId, VmRecord> vms_;
    std::set<VmId> ever_admitted_;
};

}  // namespace dcsim
