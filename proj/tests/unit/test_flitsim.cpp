#include <doctest.h>

#include <sstream>

#include "chipnet/flitsim.hpp"
#include "chipnet/netgen.hpp"
#include "chipnet/proxy.hpp"
#include "fixtures.hpp"

using namespace chipnet;
using namespace chipnet::flitsim;

namespace {

// Hand count for a single packet: every node on the path costs
// max(4, ceil(w) + 1) and every link ceil(link) + ceil(PHY) per chiplet end.
int64_t hand_count(const DesignBundle& b, int src, int dst) {
    IciGraph g = build_ici_graph(b);
    Route r = route(g, b.routing_table, src, dst);
    int64_t total = 0;
    for (int v : r.vertices) total += std::max<int64_t>(4, static_cast<int64_t>(std::ceil(g.vertex_weight[v])) + 1);
    for (int e : r.edges) {
        total += static_cast<int64_t>(std::ceil(g.edges[e].link_cycles));
        for (const auto& end : g.edges[e].ends)
            if (end.is_chiplet) total += static_cast<int64_t>(std::ceil(b.chiplet_of(end.node).phy_latency_cycles));
    }
    return total;
}

SimResult single_packet(const DesignBundle& b, int src, int dst) {
    Trace t;
    t.messages.push_back({0, 0, src, dst, 1, {}});
    return replay_trace(b, b.routing_table, t, SimParams{});
}

}  // namespace

TEST_CASE("single packet latency equals the per-hop hand count") {
    for (const char* name : {"two_chiplet", "chain3", "router_pair", "mesh2x2"}) {
        DesignBundle b = fixtures::load(name);
        const int n = b.placement.chiplet_count();
        for (int s = 0; s < n; ++s)
            for (int d = 0; d < n; ++d) {
                if (s == d) continue;
                CAPTURE(name);
                CAPTURE(s);
                CAPTURE(d);
                SimResult r = single_packet(b, s, d);
                CHECK(r.makespan_cycles == hand_count(b, s, d));
                CHECK(r.avg_packet_latency_cycles == doctest::Approx(static_cast<double>(hand_count(b, s, d))));
            }
    }
}

TEST_CASE("two-chiplet design: 3 + 1, 12 + 2 + 12, 3 + 1 pipeline cycles") {
    DesignBundle b = fixtures::load("two_chiplet");
    CHECK(single_packet(b, 0, 1).makespan_cycles == 4 + 26 + 4);
}

TEST_CASE("dependent chain of three messages") {
    DesignBundle b = fixtures::load("two_chiplet");
    REQUIRE(b.trace.has_value());
    SimResult r = replay_trace(b, b.routing_table, *b.trace, SimParams{});
    CHECK(r.makespan_cycles == 3 * 34 + 2);
    CHECK(r.delivered_packets == 3);
}

TEST_CASE("second message injects the cycle after the first is delivered") {
    DesignBundle b = fixtures::load("two_chiplet");
    Trace t;
    t.messages.push_back({1, 0, 0, 1, 1, {}});
    t.messages.push_back({2, 0, 1, 0, 1, {1}});
    SimResult r = replay_trace(b, b.routing_table, t, SimParams{});
    CHECK(r.makespan_cycles == 34 + 1 + 34);
}

TEST_CASE("independent messages: makespan ignores dependency-list order") {
    DesignBundle b = fixtures::load("mesh2x2");
    Trace t1, t2;
    for (int i = 0; i < 6; ++i) {
        TraceMessage m{i, i, i % 4, (i + 1) % 4, 2, {}};
        t1.messages.push_back(m);
    }
    t1.messages.push_back({10, 0, 0, 3, 1, {1, 2, 3}});
    t2 = t1;
    t2.messages.back().deps = {3, 1, 2};
    CHECK(replay_trace(b, b.routing_table, t1, SimParams{}).makespan_cycles ==
          replay_trace(b, b.routing_table, t2, SimParams{}).makespan_cycles);
}

TEST_CASE("zero-load latency matches the single-packet count within one cycle") {
    DesignBundle b = fixtures::load("two_chiplet");
    double z = zero_load_latency(b, b.routing_table, b.traffic, SimParams{});
    CHECK(std::abs(z - 34.0) <= 1.0);
}

TEST_CASE("4x4 mesh, lowest_id, uniform, rate 0.001: no deadlock, not saturated") {
    netgen::DesignPoint p;
    p.rows = p.cols = 4;
    DesignBundle b = netgen::build_design(p);
    SimResult r = simulate(b, b.routing_table, b.traffic, 0.001, SimParams{});
    CHECK_FALSE(r.saturated);
    CHECK(r.delivered_packets > 0);
}

TEST_CASE("deliberate dependency cycle trips the deadlock watchdog") {
    // 4-node ring where every packet travels three hops clockwise.
    netgen::DesignPoint p;
    p.topology = netgen::TopologyKind::torus;
    p.rows = 1;
    p.cols = 4;
    DesignBundle b = netgen::build_design(p);
    // links sorted: (0,1) (0,3) (1,2) (2,3); clockwise 0->1->2->3->0
    const int cw[4] = {0, 2, 3, 1};
    for (int n = 0; n < 4; ++n)
        for (auto& [d, link] : b.routing_table.next_hop[n]) link = cw[n];
    b.traffic.entries.clear();
    for (int s = 0; s < 4; ++s) b.traffic.entries.push_back({s, (s + 3) % 4, 1.0});
    SimParams sp;
    sp.vcs_per_port = 1;
    sp.buffer_flits_per_vc = 2;
    sp.packet_size_flits = 4;
    CHECK_THROWS_AS(simulate(b, b.routing_table, b.traffic, 0.9, sp), DeadlockError);
}

TEST_CASE("determinism: identical inputs give identical results") {
    netgen::DesignPoint p;
    p.rows = p.cols = 3;
    DesignBundle b = netgen::build_design(p);
    SimParams sp;
    sp.measurement_cycles = 500;
    SimResult a = simulate(b, b.routing_table, b.traffic, 0.2, sp);
    SimResult c = simulate(b, b.routing_table, b.traffic, 0.2, sp);
    CHECK(a.avg_packet_latency_cycles == c.avg_packet_latency_cycles);
    CHECK(a.delivered_packets == c.delivered_packets);
    CHECK(a.accepted_rate == c.accepted_rate);
}

TEST_CASE("saturation search protocol") {
    auto run = [](double truth) {
        return saturation_search([truth](double r) { return r > truth + 1e-9; });
    };
    SUBCASE("true saturation 12.3%") {
        SearchResult r = run(0.123);
        std::vector<double> expect = {0.10, 0.20, 0.11, 0.12, 0.13, 0.121, 0.122, 0.123, 0.124};
        REQUIRE(r.steps.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) CHECK(r.steps[i].rate == doctest::Approx(expect[i]));
        CHECK(r.rate == doctest::Approx(0.123));
    }
    SUBCASE("true saturation exactly 10%") {
        SearchResult r = run(0.10);
        std::vector<double> expect = {0.10, 0.20, 0.11, 0.101};
        REQUIRE(r.steps.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) CHECK(r.steps[i].rate == doctest::Approx(expect[i]));
        CHECK(r.rate == doctest::Approx(0.10));
    }
    SUBCASE("returned rate is stable and the next 0.1% step saturates") {
        for (double truth : {0.157, 0.2, 0.345, 0.999}) {
            SearchResult r = run(truth);
            CHECK(r.rate == doctest::Approx(truth));
            CHECK(r.rate + 0.001 > truth);
        }
    }
    SUBCASE("saturation at the first probe") {
        SearchResult r = run(0.05);
        CHECK(r.rate == 0.0);
        CHECK_FALSE(r.warning.empty());
        CHECK(r.steps.size() == 1);
    }
    SUBCASE("log is CSV") {
        std::ostringstream os;
        write_search_log(os, run(0.123));
        CHECK(os.str().rfind("probe,rate,saturated,avg_latency_cycles,accepted_rate,reason\n0,0.1,0,0,0,\n1,0.2,1,0,0,\n", 0) == 0);
    }
}
