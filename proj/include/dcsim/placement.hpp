#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dcsim/model.hpp"
#include "dcsim/power.hpp"
#include "dcsim/types.hpp"

namespace dcsim {

enum class Algorithm { Mbfd, Obfd, Rbr, Nur, Omur };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Mbfd: return "mbfd";
        case Algorithm::Obfd: return "obfd";
        case Algorithm::Rbr: return "rbr";
        case Algorithm::Nur: return "nur";
        case Algorithm::Omur: return "omur";
    }
    return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "mbfd") return Algorithm::Mbfd;
    if (lower == "obfd") return Algorithm::Obfd;
    if (lower == "rbr") return Algorithm::Rbr;
    if (lower == "nur") return Algorithm::Nur;
    if (lower == "omur") return Algorithm::Omur;
    return std::nullopt;
}

inline std::vector<Algorithm> all_algorithms() {
    return {Algorithm::Mbfd, Algorithm::Obfd, Algorithm::Rbr, Algorithm::Nur, Algorithm::Omur};
}

struct PlacementDecision {
    VmId vm = 0;
    ServerId server = 0;
    ServerClass target_class_before = ServerClass::Empty;
    bool woke_server = false;
};

struct PlacementOutcome {
    std::map<VmId, ServerId> placed;
    std::vector<VmId> unplaced;            // in processing order
    std::vector<ServerId> servers_woken;   // in wake order
    std::vector<PlacementDecision> decisions;  // in placement order
};

// Stable sort by requested MIPS descending, ties toward the lower vm id.
inline std::vector<VmId> sort_vms_by_mips_desc(const DatacenterState& state,
                                               std::vector<VmId> vms) {
    std::sort(vms.begin(), vms.end(), [&](VmId a, VmId b) {
        const int da = state.vm(a).requested_mips;
        const int db = state.vm(b).requested_mips;
        if (da != db) return da > db;
        return a < b;
    });
    return vms;
}

// Growth of total server power if the VM were added: the utilization slope
// for an On target, plus the idle component for a Sleep target.
inline double power_increase_if_placed(const DatacenterState& state, ServerId server, VmId vm) {
    const Server& s = state.topology().server(server);
    const double after = server_power_watts(
        s, ServerPowerState::On, state.utilization_after(server, state.vm(vm).requested_mips));
    const double before = state.server_state(server) == ServerPowerState::On
                              ? server_power_watts(s, ServerPowerState::On,
                                                   state.server_utilization(server))
                              : 0.0;
    return after - before;
}

// Minimum-power-increase choice among fitting candidates; ties keep the
// earlier candidate.
inline std::optional<ServerId> best_server_min_power_increase(
    const DatacenterState& state, const std::vector<ServerId>& candidates, VmId vm,
    const Thresholds& t) {
    std::optional<ServerId> best;
    double best_increase = 0.0;
    for (ServerId sid : candidates) {
        if (!state.fits(sid, vm, t)) continue;
        const double inc = power_increase_if_placed(state, sid, vm);
        if (!best || inc < best_increase) {
            best = sid;
            best_increase = inc;
        }
    }
    return best;
}

// Choice minimizing (upper threshold - post-placement utilization) among
// fitting candidates; ties keep the earlier candidate.
inline std::optional<ServerId> best_server_min_utilization_gap(
    const DatacenterState& state, const std::vector<ServerId>& candidates, VmId vm,
    const Thresholds& t) {
    std::optional<ServerId> best;
    double best_gap = 0.0;
    const int demand = state.vm(vm).requested_mips;
    for (ServerId sid : candidates) {
        if (!state.fits(sid, vm, t)) continue;
        const double gap = t.upper_utilization - state.utilization_after(sid, demand);
        if (!best || gap < best_gap) {
            best = sid;
            best_gap = gap;
        }
    }
    return best;
}

// The tiered search shared by OBFD and the rack-aware algorithms: prefer
// servers that are neither empty nor underutilized, then underutilized ones,
// and only then empty servers (waking them if asleep). Candidate order is the
// tie-break order within each tier.
inline std::optional<ServerId> obfd_tier_search(const DatacenterState& state,
                                                const std::vector<ServerId>& candidates, VmId vm,
                                                const Thresholds& t) {
    std::vector<ServerId> busy, underutilized, empty;
    for (ServerId sid : candidates) {
        switch (state.classify_server(sid, t)) {
            case ServerClass::Normal:
            case ServerClass::Overloaded: busy.push_back(sid); break;
            case ServerClass::Underutilized: underutilized.push_back(sid); break;
            case ServerClass::Empty: empty.push_back(sid); break;
        }
    }
    for (const auto* tier : {&busy, &underutilized, &empty})
        if (auto found = best_server_min_power_increase(state, *tier, vm, t)) return found;
    return std::nullopt;
}

namespace detail {

inline std::vector<ServerId> all_server_ids(const DatacenterState& state) {
    std::vector<ServerId> ids(state.topology().server_count());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<ServerId>(i);
    return ids;
}

inline std::vector<RackId> racks_by_utilization_desc(const DatacenterState& state) {
    std::vector<RackId> racks(state.topology().rack_count());
    for (std::size_t i = 0; i < racks.size(); ++i) racks[i] = static_cast<RackId>(i);
    std::stable_sort(racks.begin(), racks.end(), [&](RackId a, RackId b) {
        return state.rack_utilization(a) > state.rack_utilization(b);
    });
    return racks;
}

// A rack counts as non-underutilized when it is active and its utilization
// has reached the lower threshold.
inline bool rack_non_underutilized(const DatacenterState& state, RackId rack,
                                   const Thresholds& t) {
    return state.rack_active(rack) && state.rack_utilization(rack) >= t.lower_utilization;
}

inline std::vector<ServerId> rack_members(const DatacenterState& state, RackId rack,
                                          const std::set<ServerId>& allowed) {
    std::vector<ServerId> out;
    for (ServerId sid : state.topology().rack(rack).server_ids)
        if (allowed.count(sid)) out.push_back(sid);
    std::sort(out.begin(), out.end());
    return out;
}

// Flat MBFD candidate list: On servers by id, then Sleep servers by id.
inline std::optional<ServerId> mbfd_search(const DatacenterState& state,
                                           const std::set<ServerId>& allowed, VmId vm,
                                           const Thresholds& t) {
    std::vector<ServerId> flat;
    for (ServerId sid : allowed)
        if (state.server_state(sid) == ServerPowerState::On) flat.push_back(sid);
    for (ServerId sid : allowed)
        if (state.server_state(sid) == ServerPowerState::Sleep) flat.push_back(sid);
    return best_server_min_power_increase(state, flat, vm, t);
}

inline std::optional<ServerId> obfd_search(const DatacenterState& state,
                                           const std::set<ServerId>& allowed, VmId vm,
                                           const Thresholds& t) {
    const std::vector<ServerId> candidates(allowed.begin(), allowed.end());
    return obfd_tier_search(state, candidates, vm, t);
}

// Rack-by-rack: the most utilized rack that still has one fitting server
// receives the VM; server choice inside the rack follows the tiered search.
inline std::optional<ServerId> rbr_search(const DatacenterState& state,
                                          const std::set<ServerId>& allowed, VmId vm,
                                          const Thresholds& t) {
    for (RackId rack : racks_by_utilization_desc(state)) {
        const std::vector<ServerId> members = rack_members(state, rack, allowed);
        if (members.empty()) continue;
        const bool any_fit = std::any_of(members.begin(), members.end(), [&](ServerId sid) {
            return state.fits(sid, vm, t);
        });
        if (!any_fit) continue;
        return obfd_tier_search(state, members, vm, t);
    }
    return std::nullopt;
}

// Non-underutilized racks first, then active underutilized racks, then
// inactive racks; the tiered search runs inside each class.
inline std::optional<ServerId> nur_search(const DatacenterState& state,
                                          const std::set<ServerId>& allowed, VmId vm,
                                          const Thresholds& t) {
    std::vector<ServerId> class_a, class_b, class_c;
    for (const Rack& rack : state.topology().racks) {
        const std::vector<ServerId> members = rack_members(state, rack.id, allowed);
        if (members.empty()) continue;
        auto* bucket = &class_c;
        if (state.rack_active(rack.id))
            bucket = rack_non_underutilized(state, rack.id, t) ? &class_a : &class_b;
        bucket->insert(bucket->end(), members.begin(), members.end());
    }
    for (auto* cls : {&class_a, &class_b, &class_c})
        if (auto found = obfd_tier_search(state, *cls, vm, t)) return found;
    return std::nullopt;
}

// Minimum-utilization-gap packing over the active servers of
// non-underutilized racks; when nothing there fits, scan racks in decreasing
// utilization and run the tiered search inside each, servers ordered by
// decreasing utilization.
inline std::optional<ServerId> omur_search(const DatacenterState& state,
                                           const std::set<ServerId>& allowed, VmId vm,
                                           const Thresholds& t) {
    std::vector<ServerId> packed;
    for (const Rack& rack : state.topology().racks) {
        if (!rack_non_underutilized(state, rack.id, t)) continue;
        for (ServerId sid : rack_members(state, rack.id, allowed))
            if (state.server_state(sid) == ServerPowerState::On) packed.push_back(sid);
    }
    std::sort(packed.begin(), packed.end());
    if (auto found = best_server_min_utilization_gap(state, packed, vm, t)) return found;

    for (RackId rack : racks_by_utilization_desc(state)) {
        std::vector<ServerId> members = rack_members(state, rack, allowed);
        if (members.empty()) continue;
        std::stable_sort(members.begin(), members.end(), [&](ServerId a, ServerId b) {
            return state.server_utilization(a) > state.server_utilization(b);
        });
        if (auto found = obfd_tier_search(state, members, vm, t)) return found;
    }
    return std::nullopt;
}

}  // namespace detail

// One VM's target under the given algorithm, restricted to the allowed
// server set. Used both for placement passes and for evacuation passes with
// narrowed target sets. Does not mutate state.
inline std::optional<ServerId> search_target(const DatacenterState& state, Algorithm algorithm,
                                             VmId vm, const Thresholds& t,
                                             const std::set<ServerId>& allowed) {
    switch (algorithm) {
        case Algorithm::Mbfd: return detail::mbfd_search(state, allowed, vm, t);
        case Algorithm::Obfd: return detail::obfd_search(state, allowed, vm, t);
        case Algorithm::Rbr: return detail::rbr_search(state, allowed, vm, t);
        case Algorithm::Nur: return detail::nur_search(state, allowed, vm, t);
        case Algorithm::Omur: return detail::omur_search(state, allowed, vm, t);
    }
    return std::nullopt;
}

inline std::optional<ServerId> search_target(const DatacenterState& state, Algorithm algorithm,
                                             VmId vm, const Thresholds& t) {
    std::set<ServerId> allowed;
    for (ServerId sid : detail::all_server_ids(state)) allowed.insert(sid);
    return search_target(state, algorithm, vm, t, allowed);
}

// Places the request (arrivals merged with overload-evicted VMs) one VM at a
// time in decreasing requested-MIPS order, waking servers as chosen targets
// require. VMs with no admissible target are reported unplaced and left
// unhosted. Mutates state in place.
inline PlacementOutcome place_vms(DatacenterState& state, Algorithm algorithm,
                                  const std::vector<VmId>& request, const Thresholds& t) {
    t.validate();
    std::set<VmId> seen;
    for (VmId vm : request) {
        if (!seen.insert(vm).second)
            throw ContractError("vm " + std::to_string(vm) + " appears twice in the request");
        if (state.host_of(vm))
            throw ContractError("vm " + std::to_string(vm) + " is already placed");
        state.vm(vm);  // lookup check
    }

    std::set<ServerId> allowed;
    for (ServerId sid : detail::all_server_ids(state)) allowed.insert(sid);

    PlacementOutcome outcome;
    for (VmId vm : sort_vms_by_mips_desc(state, request)) {
        const auto target = search_target(state, algorithm, vm, t, allowed);
        if (!target) {
            outcome.unplaced.push_back(vm);
            continue;
        }
        PlacementDecision decision;
        decision.vm = vm;
        decision.server = *target;
        decision.target_class_before = state.classify_server(*target, t);
        decision.woke_server = state.server_state(*target) == ServerPowerState::Sleep;
        if (decision.woke_server) {
            state.wake(*target);
            outcome.servers_woken.push_back(*target);
        }
        state.place(vm, *target);
        outcome.placed.emplace(vm, *target);
        outcome.decisions.push_back(decision);
    }
    return outcome;
}

inline PlacementOutcome mbfd_place(DatacenterState& state, const std::vector<VmId>& request,
                                   const Thresholds& t) {
    return place_vms(state, Algorithm::Mbfd, request, t);
}
inline PlacementOutcome obfd_place(DatacenterState& state, const std::vector<VmId>& request,
                                   const Thresholds& t) {
    return place_vms(state, Algorithm::Obfd, request, t);
}
inline PlacementOutcome rbr_place(DatacenterState& state, const std::vector<VmId>& request,
                                  const Thresholds& t) {
    return place_vms(state, Algorithm::Rbr, request, t);
}
inline PlacementOutcome nur_place(DatacenterState& state, const std::vector<VmId>& request,
                                  const Thresholds& t) {
    return place_vms(state, Algorithm::Nur, request, t);
}
inline PlacementOutcome omur_place(DatacenterState& state, const std::vector<VmId>& request,
                                   const Thresholds& t) {
    return place_vms(state, Algorithm::Omur, request, t);
}

}  // namespace dcsim
