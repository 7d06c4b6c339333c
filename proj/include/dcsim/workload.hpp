#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dcsim/errors.hpp"
#include "dcsim/rng.hpp"
#include "dcsim/types.hpp"

namespace dcsim {

// Synthetic benchmark shape: an epoch-structured population where VMs leave,
// change their requested MIPS, or arrive, all drawn uniformly from one seeded
// stream.
struct WorkloadConfig {
    int epochs = 200;
    int initial_vm_count = 120;
    std::vector<int> vm_capacity_choices = {250, 500, 750, 1000};
    int vm_memory_mb = 128;
    int vm_storage_gb = 1;
    double p_leave = 0.05;          // per VM per epoch
    double p_demand_change = 0.5;   // per surviving VM per epoch
    double arrival_rate = 0.05;     // expected arrivals = rate * initial_vm_count
    double epoch_seconds = 300.0;
    std::uint64_t rng_seed = 1;
    // Stop admitting arrivals once the summed VM capacity would exceed this;
    // 0 disables the cap.
    long long capacity_cap_mips = 0;

    double expected_arrivals_per_epoch() const { return arrival_rate * initial_vm_count; }

    void validate() const {
        auto prob = [](double p, const char* name) {
            if (p < 0.0 || p > 1.0)
                throw ValidationError(std::string(name) + " must be in [0,1]");
        };
        if (epochs < 0) throw ValidationError("epochs must be non-negative");
        if (initial_vm_count < 0) throw ValidationError("initial_vm_count must be non-negative");
        if (vm_capacity_choices.empty())
            throw ValidationError("vm_capacity_choices must not be empty");
        for (int c : vm_capacity_choices)
            if (c <= 0) throw ValidationError("vm capacity choices must be positive");
        if (vm_memory_mb <= 0 || vm_storage_gb <= 0)
            throw ValidationError("vm memory and storage must be positive");
        prob(p_leave, "p_leave");
        prob(p_demand_change, "p_demand_change");
        if (arrival_rate < 0.0) throw ValidationError("arrival_rate must be non-negative");
        if (epoch_seconds <= 0.0) throw ValidationError("epoch_seconds must be positive");
        if (capacity_cap_mips < 0) throw ValidationError("capacity_cap_mips must be non-negative");
    }
};

struct Arrival {
    VmSpec spec;
    int requested_mips = 0;

    bool operator==(const Arrival&) const = default;
};

// The four workload groups for one epoch. Departures, update keys and
// arrivals are disjoint by construction.
struct EpochEvents {
    int epoch = 0;
    std::vector<VmId> departures;        // ascending id
    std::map<VmId, int> demand_updates;  // vm -> new requested MIPS
    std::vector<Arrival> arrivals;       // ascending id

    bool empty() const { return departures.empty() && demand_updates.empty() && arrivals.empty(); }

    bool operator==(const EpochEvents&) const = default;
};

struct Trace {
    std::uint64_t seed = 0;
    int vm_memory_mb = 128;
    int vm_storage_gb = 1;
    std::vector<EpochEvents> epochs;

    bool operator==(const Trace&) const = default;
};

// Draws the full benchmark. Epoch 0 holds only the initial population's
// arrivals; later epochs apply departures, demand resampling and Poisson
// arrivals in that order. All randomness flows from config.rng_seed.
inline Trace generate_benchmark(const WorkloadConfig& config) {
    config.validate();
    Rng rng(config.rng_seed);
    Trace trace;
    trace.seed = config.rng_seed;
    trace.vm_memory_mb = config.vm_memory_mb;
    trace.vm_storage_gb = config.vm_storage_gb;

    std::map<VmId, int> live;  // vm -> capacity
    long long live_capacity = 0;
    VmId next_id = 0;

    auto draw_arrival = [&]() {
        const int cap = config.vm_capacity_choices[static_cast<std::size_t>(
            rng.uniform_below(config.vm_capacity_choices.size()))];
        Arrival a;
        a.spec = VmSpec{next_id, cap, config.vm_memory_mb, config.vm_storage_gb};
        a.requested_mips = rng.uniform_int(1, cap);
        return a;
    };
    auto capacity_allows = [&](int cap) {
        return config.capacity_cap_mips == 0 ||
               live_capacity + cap <= config.capacity_cap_mips;
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        EpochEvents ev;
        ev.epoch = epoch;
        if (epoch == 0) {
            for (int i = 0; i < config.initial_vm_count; ++i) {
                Arrival a = draw_arrival();
                if (!capacity_allows(a.spec.capacity_mips)) break;
                live.emplace(a.spec.id, a.spec.capacity_mips);
                live_capacity += a.spec.capacity_mips;
                ++next_id;
                ev.arrivals.push_back(std::move(a));
            }
        } else {
            for (auto it = live.begin(); it != live.end();) {
                if (rng.bernoulli(config.p_leave)) {
                    ev.departures.push_back(it->first);
                    live_capacity -= it->second;
                    it = live.erase(it);
                } else {
                    ++it;
                }
            }
            for (const auto& [id, cap] : live)
                if (rng.bernoulli(config.p_demand_change))
                    ev.demand_updates[id] = rng.uniform_int(1, cap);
            const int arrivals = rng.poisson(config.expected_arrivals_per_epoch());
            for (int i = 0; i < arrivals; ++i) {
                Arrival a = draw_arrival();
                if (!capacity_allows(a.spec.capacity_mips)) break;
                live.emplace(a.spec.id, a.spec.capacity_mips);
                live_capacity += a.spec.capacity_mips;
                ++next_id;
                ev.arrivals.push_back(std::move(a));
            }
        }
        trace.epochs.push_back(std::move(ev));
    }
    return trace;
}

inline constexpr const char* kTraceMagic = "# dcsim-trace 1";

inline void write_trace(const Trace& trace, std::ostream& os) {
    os << kTraceMagic << "\n";
    os << "# seed " << trace.seed << "\n";
    os << "# epochs " << trace.epochs.size() << "\n";
    os << "# vm_memory_mb " << trace.vm_memory_mb << "\n";
    os << "# vm_storage_gb " << trace.vm_storage_gb << "\n";
    for (const EpochEvents& ev : trace.epochs) {
        for (VmId id : ev.departures)
            os << ev.epoch << " depart " << id << " 0 0\n";
        for (const auto& [id, mips] : ev.demand_updates)
            os << ev.epoch << " update " << id << " 0 " << mips << "\n";
        for (const Arrival& a : ev.arrivals)
            os << ev.epoch << " arrive " << a.spec.id << " " << a.spec.capacity_mips << " "
               << a.requested_mips << "\n";
    }
}

inline void write_trace(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open trace file for writing: " + path.string());
    write_trace(trace, os);
}

// Parses and validates a trace: record syntax, per-VM demand bounds, id
// reuse, and epoch ordering are all checked. An empty stream is a valid
// zero-epoch trace.
inline Trace read_trace(std::istream& is) {
    Trace trace;
    std::string line;
    std::size_t line_no = 0;
    bool saw_magic = false;
    bool saw_epochs = false;
    std::size_t epoch_count = 0;

    std::map<VmId, int> live;     // vm -> capacity
    std::set<VmId> ever_used;
    int last_epoch = -1;

    auto parse_header = [&](const std::string& text) {
        std::istringstream ss(text);
        std::string hash, key;
        ss >> hash >> key;
        long long value = 0;
        if (key == "dcsim-trace") {
            ss >> value;
            if (value != 1) throw ParseError("unsupported trace schema version", line_no);
            saw_magic = true;
        } else if (key == "seed") {
            std::uint64_t seed = 0;
            if (!(ss >> seed)) throw ParseError("malformed seed header", line_no);
            trace.seed = seed;
        } else if (key == "epochs") {
            if (!(ss >> value) || value < 0) throw ParseError("malformed epochs header", line_no);
            epoch_count = static_cast<std::size_t>(value);
            saw_epochs = true;
        } else if (key == "vm_memory_mb") {
            if (!(ss >> value) || value <= 0)
                throw ParseError("malformed vm_memory_mb header", line_no);
            trace.vm_memory_mb = static_cast<int>(value);
        } else if (key == "vm_storage_gb") {
            if (!(ss >> value) || value <= 0)
                throw ParseError("malformed vm_storage_gb header", line_no);
            trace.vm_storage_gb = static_cast<int>(value);
        }
        // Unknown '#' lines are comments.
    };

    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            parse_header(line);
            continue;
        }
        if (!saw_magic) throw ParseError("missing '# dcsim-trace 1' header", line_no);
        if (!saw_epochs) throw ParseError("missing '# epochs' header", line_no);
        if (trace.epochs.size() != epoch_count) trace.epochs.resize(epoch_count);

        std::istringstream ss(line);
        long long epoch = -1;
        std::string kind;
        long long vm = -1, capacity = -1, requested = -1;
        if (!(ss >> epoch)) throw ParseError("field 'epoch' is not an integer", line_no);
        if (!(ss >> kind)) throw ParseError("missing field 'kind'", line_no);
        if (!(ss >> vm)) throw ParseError("field 'vm_id' is not an integer", line_no);
        if (!(ss >> capacity)) throw ParseError("field 'capacity_mips' is not an integer", line_no);
        if (!(ss >> requested)) throw ParseError("field 'requested_mips' is not an integer", line_no);
        std::string extra;
        if (ss >> extra) throw ParseError("trailing content after 'requested_mips'", line_no);

        if (epoch < 0 || static_cast<std::size_t>(epoch) >= epoch_count)
            throw ParseError("field 'epoch' out of range", line_no);
        if (epoch < last_epoch) throw ParseError("epochs must be non-decreasing", line_no);
        last_epoch = static_cast<int>(epoch);
        if (vm < 0) throw ParseError("field 'vm_id' must be non-negative", line_no);
        const VmId vm_id = static_cast<VmId>(vm);
        EpochEvents& ev = trace.epochs[static_cast<std::size_t>(epoch)];
        ev.epoch = static_cast<int>(epoch);

        if (kind == "depart") {
            auto it = live.find(vm_id);
            if (it == live.end())
                throw ValidationError("line " + std::to_string(line_no) + ": departure of unknown vm " +
                                      std::to_string(vm_id));
            live.erase(it);
            ev.departures.push_back(vm_id);
        } else if (kind == "update") {
            auto it = live.find(vm_id);
            if (it == live.end())
                throw ValidationError("line " + std::to_string(line_no) + ": update of unknown vm " +
                                      std::to_string(vm_id));
            if (requested <= 0 || requested > it->second)
                throw ValidationError("line " + std::to_string(line_no) + ": demand " +
                                      std::to_string(requested) + " outside (0, " +
                                      std::to_string(it->second) + "] for vm " +
                                      std::to_string(vm_id));
            ev.demand_updates[vm_id] = static_cast<int>(requested);
        } else if (kind == "arrive") {
            if (ever_used.count(vm_id))
                throw ValidationError("line " + std::to_string(line_no) + ": vm id " +
                                      std::to_string(vm_id) + " reused");
            if (capacity <= 0)
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": arrival capacity must be positive");
            if (requested <= 0 || requested > capacity)
                throw ValidationError("line " + std::to_string(line_no) + ": demand " +
                                      std::to_string(requested) + " outside (0, " +
                                      std::to_string(capacity) + "] for vm " +
                                      std::to_string(vm_id));
            ever_used.insert(vm_id);
            live.emplace(vm_id, static_cast<int>(capacity));
            Arrival a;
            a.spec = VmSpec{vm_id, static_cast<int>(capacity), trace.vm_memory_mb,
                            trace.vm_storage_gb};
            a.requested_mips = static_cast<int>(requested);
            ev.arrivals.push_back(std::move(a));
        } else {
            throw ParseError("unknown kind '" + kind + "'", line_no);
        }
    }

    if (saw_epochs && trace.epochs.size() != epoch_count) {
        trace.epochs.resize(epoch_count);
        for (std::size_t e = 0; e < epoch_count; ++e)
            trace.epochs[e].epoch = static_cast<int>(e);
    }
    // Canonical order inside each epoch.
    for (EpochEvents& ev : trace.epochs) {
        std::sort(ev.departures.begin(), ev.departures.end());
        std::sort(ev.arrivals.begin(), ev.arrivals.end(),
                  [](const Arrival& a, const Arrival& b) { return a.spec.id < b.spec.id; });
    }
    return trace;
}

inline Trace read_trace(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open trace file: " + path.string());
    return read_trace(is);
}

}  // namespace dcsim
