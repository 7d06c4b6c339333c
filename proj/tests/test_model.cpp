#include <catch2/catch_amalgamated.hpp>

#include "dcsim/dcsim.hpp"
#include "test_util.hpp"

using namespace dcsim;
using testutil::host_vm;
using testutil::make_topology;
using testutil::vm_spec;

namespace {

DatacenterState one_server_state() {
    testutil::TopologyParams p;
    return DatacenterState(make_topology(p));
}

}  // namespace

TEST_CASE("server utilization is hosted demand over capacity", "[model]") {
    DatacenterState state = one_server_state();
    host_vm(state, 1, 1000, 600, 0);
    host_vm(state, 2, 500, 300, 0);
    CHECK(state.server_utilization(0) == Catch::Approx(0.45).epsilon(1e-12));

    SECTION("empty server reads zero") {
        DatacenterState empty = one_server_state();
        CHECK(empty.server_utilization(0) == 0.0);
    }

    SECTION("overload pushes utilization past one") {
        DatacenterState s = one_server_state();
        host_vm(s, 1, 1500, 1500, 0);
        host_vm(s, 2, 1000, 800, 0);
        CHECK(s.server_utilization(0) == Catch::Approx(1.15).epsilon(1e-12));
    }

    SECTION("unknown server id") {
        CHECK_THROWS_AS(state.server_utilization(99), LookupError);
    }
}

TEST_CASE("rack utilization counts all servers in the denominator", "[model]") {
    testutil::TopologyParams p;
    p.servers_per_rack = 10;
    DatacenterState state(make_topology(p));

    SECTION("hosted demand 4000 over 20000 capacity") {
        for (VmId id = 0; id < 4; ++id) host_vm(state, id + 1, 1000, 1000, id);
        CHECK(state.rack_utilization(0) == Catch::Approx(0.20).epsilon(1e-12));
        // Sleeping the other six servers must not change the denominator.
        CHECK(state.server_state(5) == ServerPowerState::Sleep);
    }

    SECTION("all servers asleep reads zero") { CHECK(state.rack_utilization(0) == 0.0); }

    SECTION("demand 16400 over 20000") {
        VmId id = 1;
        for (int s = 0; s < 10; ++s) {
            host_vm(state, id++, 1000, 1000, static_cast<ServerId>(s));
            if (s < 6) host_vm(state, id++, 1000, 1000, static_cast<ServerId>(s));
        }
        host_vm(state, id++, 500, 400, 0);
        REQUIRE(state.rack_utilization(0) == Catch::Approx(0.82).epsilon(1e-12));
    }

    SECTION("unknown rack id") { CHECK_THROWS_AS(state.rack_utilization(7), LookupError); }
}

TEST_CASE("rack utilization equals mean server utilization for equal capacities", "[model]") {
    testutil::TopologyParams p;
    p.servers_per_rack = 10;
    DatacenterState state(make_topology(p));
    Rng rng(7);
    VmId id = 1;
    for (int s = 0; s < 10; ++s) {
        const int n = rng.uniform_int(0, 3);
        for (int i = 0; i < n; ++i)
            host_vm(state, id++, 1000, rng.uniform_int(1, 1000), static_cast<ServerId>(s));
    }
    double mean = 0.0;
    for (int s = 0; s < 10; ++s) mean += state.server_utilization(static_cast<ServerId>(s));
    mean /= 10.0;
    CHECK(state.rack_utilization(0) == Catch::Approx(mean).margin(1e-12));
}

TEST_CASE("classification partitions utilization", "[model]") {
    const Thresholds t{0.4, 0.8};
    DatacenterState state = one_server_state();

    CHECK(state.classify_server(0, t) == ServerClass::Empty);

    host_vm(state, 1, 1000, 900, 0);  // U = 0.45
    CHECK(state.classify_server(0, t) == ServerClass::Normal);

    state.set_demand(1, 790);  // U = 0.395
    CHECK(state.classify_server(0, t) == ServerClass::Underutilized);

    state.set_demand(1, 800);  // U = 0.4, boundary is Normal
    CHECK(state.classify_server(0, t) == ServerClass::Normal);

    DatacenterState hot = one_server_state();
    host_vm(hot, 1, 1000, 1000, 0);
    host_vm(hot, 2, 1000, 800, 0);  // U = 0.9
    CHECK(hot.classify_server(0, t) == ServerClass::Overloaded);

    SECTION("boundary at the upper threshold is Normal") {
        DatacenterState s = one_server_state();
        host_vm(s, 1, 1000, 1000, 0);
        host_vm(s, 2, 1000, 600, 0);  // U = 0.8
        CHECK(s.classify_server(0, t) == ServerClass::Normal);
    }

    SECTION("an On server hosting nothing is Empty, not Underutilized") {
        DatacenterState s = one_server_state();
        s.wake(0);
        CHECK(s.classify_server(0, t) == ServerClass::Empty);
    }
}

TEST_CASE("fits requires residual memory, storage and the upper threshold", "[model]") {
    const Thresholds t{0.4, 0.8};
    DatacenterState state = one_server_state();
    host_vm(state, 1, 1000, 600, 0);  // U = 0.3

    state.admit_vm(vm_spec(2, 1000), 600);
    CHECK(state.fits(0, 2, t));  // 0.6 <= 0.8

    state.set_demand(1, 1400);  // U = 0.7
    CHECK_FALSE(state.fits(0, 2, t));  // 1.0 > 0.8

    SECTION("memory exhaustion") {
        testutil::TopologyParams p;
        p.memory_mb = 256;
        DatacenterState small(make_topology(p));
        host_vm(small, 1, 250, 100, 0);
        host_vm(small, 2, 250, 100, 0);
        small.admit_vm(vm_spec(3, 250), 1);
        CHECK(small.free_memory_mb(0) == 0);
        CHECK_FALSE(small.fits(0, 3, t));
    }

    SECTION("post-placement utilization exactly at the threshold fits") {
        DatacenterState s = one_server_state();
        host_vm(s, 1, 1000, 1000, 0);
        s.admit_vm(vm_spec(2, 1000), 600);  // 1600/2000 == 0.8
        CHECK(s.fits(0, 2, t));
    }
}

TEST_CASE("utilization is additive in hosted demand", "[model]") {
    DatacenterState state = one_server_state();
    Rng rng(11);
    int used = 0;
    for (VmId id = 1; id <= 5; ++id) {
        const int demand = rng.uniform_int(1, 300);
        const double before = state.server_utilization(0);
        host_vm(state, id, 1000, demand, 0);
        used += demand;
        CHECK(state.used_mips(0) == used);
        CHECK(state.server_utilization(0) ==
              Catch::Approx(before + demand / 2000.0).margin(1e-12));
    }
}

TEST_CASE("vm population bookkeeping", "[model]") {
    DatacenterState state = one_server_state();

    SECTION("demand bound is enforced") {
        CHECK_THROWS_AS(state.admit_vm(vm_spec(1, 1000), 0), std::invalid_argument);
        CHECK_THROWS_AS(state.admit_vm(vm_spec(1, 1000), 1001), std::invalid_argument);
        state.admit_vm(vm_spec(1, 1000), 1000);
        CHECK_THROWS_AS(state.set_demand(1, 1200), std::invalid_argument);
    }

    SECTION("ids are never reused") {
        state.admit_vm(vm_spec(1, 1000), 500);
        state.remove_vm(1);
        CHECK_THROWS_AS(state.admit_vm(vm_spec(1, 1000), 500), ValidationError);
    }

    SECTION("departure frees the host") {
        host_vm(state, 1, 1000, 500, 0);
        REQUIRE(state.used_mips(0) == 500);
        state.remove_vm(1);
        CHECK(state.used_mips(0) == 0);
        CHECK(state.hosted_vms(0).empty());
    }

    SECTION("a sleeping server cannot host or be slept while hosting") {
        state.admit_vm(vm_spec(1, 1000), 500);
        CHECK_THROWS_AS(state.place(1, 0), ContractError);
        state.wake(0);
        state.place(1, 0);
        CHECK_THROWS_AS(state.sleep(0), ContractError);
    }

    SECTION("unplaced pool tracks unhosted VMs in id order") {
        state.admit_vm(vm_spec(3, 500), 100);
        state.admit_vm(vm_spec(1, 500), 100);
        host_vm(state, 2, 500, 100, 0);
        CHECK(state.unplaced_vms() == std::vector<VmId>{1, 3});
    }
}
