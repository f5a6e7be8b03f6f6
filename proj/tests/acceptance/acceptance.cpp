// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is 0 only when every criterion passes.
//
//   acceptance            run everything
//   acceptance 2 5 9      run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chipnet/dse.hpp"
#include "chipnet/flitsim.hpp"
#include "chipnet/netgen.hpp"
#include "chipnet/proxy.hpp"
#include "corpus.hpp"
#include "fixtures.hpp"
#include "naive.hpp"

using namespace chipnet;
using namespace chipnet::netgen;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void note(const std::string& s) { notes.push_back(s); }
    void fail(const std::string& s) {
        pass = false;
        notes.push_back("FAIL: " + s);
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median3(const std::function<double()>& f) {
    std::vector<double> v = {f(), f(), f()};
    std::sort(v.begin(), v.end());
    return v[1];
}

DesignBundle reference_design(TopologyKind kind, int rows, int cols, TrafficPattern traffic) {
    DesignPoint p;
    p.topology = kind;
    p.rows = rows;
    p.cols = cols;
    p.traffic = traffic;
    return build_design(p);
}

// 1 ---------------------------------------------------------------------------
Outcome hand_oracle() {
    Outcome o;
    for (auto [name, expect] : {std::pair{"two_chiplet", 32.0}, std::pair{"chain3", 61.0}}) {
        DesignBundle b = fixtures::load(name);
        for (int i = 0; i < b.placement.chiplet_count(); ++i) {
            const ChipletDef& c = b.chiplet_of(i);
            if (c.internal_latency_cycles != 3 || c.phy_latency_cycles != 12) o.fail(std::string(name) + ": latencies differ from 3/12");
        }
        const auto* per_mm = std::get_if<PerMmLatency>(&b.packaging.link_latency);
        if (!per_mm || per_mm->cycles_per_mm != 0.25) o.fail(std::string(name) + ": link latency is not 0.25 cy/mm");
        double got = latency_proxy(build_ici_graph(b), b.routing_table, b.traffic);
        o.note(fmt("%s: latency %.17g (expected %g)", name, got, expect));
        if (got != expect) o.fail(fmt("%s latency %.17g != %g", name, got, expect));
    }
    return o;
}

const TopologyKind kTori[] = {TopologyKind::mesh, TopologyKind::torus, TopologyKind::folded_torus};

// 2 ---------------------------------------------------------------------------
Outcome latency_vs_sim() {
    Outcome o;
    auto t0 = Clock::now();
    double worst = 0, sum = 0;
    int n = 0;
    for (TopologyKind k : kTori)
        for (int size : {3, 4, 6})
            for (TrafficPattern t : {TrafficPattern::uniform, TrafficPattern::transpose}) {
                DesignBundle b = reference_design(k, size, size, t);
                double proxy = latency_proxy(build_ici_graph(b), b.routing_table, b.traffic);
                double sim = flitsim::zero_load_latency(b, b.routing_table, b.traffic, SimParams{});
                double err = std::abs(proxy - sim) / sim;
                worst = std::max(worst, err);
                sum += err;
                ++n;
                o.note(fmt("%-12s %dx%d %-9s proxy %7.2f  sim %7.2f  error %5.2f%%", to_string(k), size, size,
                           to_string(t), proxy, sim, 100 * err));
                if (err > 0.10) o.fail(fmt("%s %dx%d %s error %.2f%% > 10%%", to_string(k), size, size, to_string(t), 100 * err));
            }
    o.note(fmt("mean error %.2f%%, max %.2f%%, %.1f s", 100 * sum / n, 100 * worst, seconds_since(t0)));
    if (seconds_since(t0) > 300) o.fail("took longer than 5 min");
    return o;
}

// 3 ---------------------------------------------------------------------------
Outcome throughput_vs_sim() {
    Outcome o;
    auto t0 = Clock::now();
    double worst = 0, sum = 0;
    int n = 0;
    for (TopologyKind k : kTori)
        for (int size : {3, 4, 6}) {
            DesignBundle b = reference_design(k, size, size, TrafficPattern::uniform);
            IciGraph g = build_ici_graph(b);
            double proxy = normalized_throughput(evaluate_proxies(g, b.routing_table, b.traffic), g);
            flitsim::SearchResult s = flitsim::saturation_throughput(b, b.routing_table, b.traffic, SimParams{});
            if (!(s.rate > 0)) {
                o.fail(fmt("%s %dx%d: saturation rate is 0", to_string(k), size, size));
                continue;
            }
            double err = std::abs(proxy - s.rate) / s.rate;
            worst = std::max(worst, err);
            sum += err;
            ++n;
            o.note(fmt("%-12s %dx%d proxy %.4f  sim %.3f  error %5.2f%%  (%zu probes)", to_string(k), size, size, proxy,
                       s.rate, 100 * err, s.steps.size()));
            if (err > 0.40) o.fail(fmt("%s %dx%d error %.2f%% > 40%%", to_string(k), size, size, 100 * err));
        }
    if (n) o.note(fmt("mean error %.2f%%, max %.2f%%, %.1f s", 100 * sum / n, 100 * worst, seconds_since(t0)));
    if (seconds_since(t0) > 1800) o.fail("took longer than 30 min");
    return o;
}

// 4 ---------------------------------------------------------------------------
Outcome speedup() {
    Outcome o;
    DesignBundle b = reference_design(TopologyKind::mesh, 6, 6, TrafficPattern::uniform);
    // the proxy path starts from the bundle, like the simulator does
    double proxy = median3([&] {
        const int reps = 200;
        auto t0 = Clock::now();
        double sink = 0;
        for (int i = 0; i < reps; ++i) {
            IciGraph g = build_ici_graph(b);
            sink += evaluate_proxies(g, b.routing_table, b.traffic).throughput;
        }
        if (!(sink > 0)) std::abort();
        return seconds_since(t0) / reps;
    });
    double sim = median3([&] {
        auto t0 = Clock::now();
        flitsim::saturation_throughput(b, b.routing_table, b.traffic, SimParams{});
        return seconds_since(t0);
    });
    double ratio = sim / proxy;
    o.note(fmt("proxy %.3g s (median of 3, each averaged over 200 calls), saturation search %.3g s (median of 3)", proxy, sim));
    o.note(fmt("speedup %.0fx", ratio));
    if (ratio < 100) o.fail(fmt("speedup %.1fx < 100x", ratio));
    return o;
}

// 5 ---------------------------------------------------------------------------
Outcome search_protocol() {
    Outcome o;
    // saturated strictly above 12.3%, compared in per-mille to stay exact
    flitsim::SearchResult r =
        flitsim::saturation_search([](double rate) { return std::llround(rate * 1000) > 123; }, 1.0);
    std::vector<long long> got;
    for (const auto& s : r.steps) got.push_back(std::llround(s.rate * 1000));
    const std::vector<long long> expect = {100, 200, 110, 120, 130, 121, 122, 123, 124};
    std::ostringstream seq;
    for (auto v : got) seq << v / 10.0 << ' ';
    o.note("probed rates (%): " + seq.str());
    o.note(fmt("reported saturation %.1f%%", 100 * r.rate));
    if (got != expect) o.fail("sequence differs from 10 20 11 12 13 12.1 12.2 12.3 12.4");
    if (std::llround(r.rate * 1000) != 123) o.fail("reported rate is not 12.3%");
    return o;
}

// 6 ---------------------------------------------------------------------------
Outcome area_overhead() {
    Outcome o;
    DesignPoint p;
    p.rows = p.cols = 10;
    p.chiplet.base_area_mm2 = 74;
    p.chiplet.phy_area_overhead_mm2 = 0.85;
    p.topology = TopologyKind::mesh;
    double mesh = 0, fb = 0;
    {
        DesignBundle b = build_design(p);
        for (int i = 0; i < b.placement.chiplet_count(); ++i) mesh += b.chiplet_of(i).area_mm2();
    }
    p.topology = TopologyKind::flattened_butterfly;
    {
        DesignBundle b = build_design(p);
        for (int i = 0; i < b.placement.chiplet_count(); ++i) fb += b.chiplet_of(i).area_mm2();
    }
    // independent count: corners degree 2, edges degree 3, interior degree 4; butterfly degree 18
    double mesh_hand = 4 * (74 + 2 * 0.85) + 32 * (74 + 3 * 0.85) + 64 * (74 + 4 * 0.85);
    double fb_hand = 100 * (74 + 18 * 0.85);
    double overhead = fb / mesh - 1;
    o.note(fmt("mesh %.2f mm2 (hand %.2f), flattened butterfly %.2f mm2 (hand %.2f), overhead %.2f%%", mesh, mesh_hand,
               fb, fb_hand, 100 * overhead));
    if (std::abs(mesh - mesh_hand) > 1e-6 || std::abs(fb - fb_hand) > 1e-6) o.fail("areas disagree with hand count");
    if (std::abs(overhead - 0.16) > 0.01) o.fail("overhead outside 16% +- 1%");
    return o;
}

// 7 ---------------------------------------------------------------------------
Outcome shg() {
    Outcome o;
    for (int n : {4, 10}) {
        std::vector<bool> zero(2 * n - 4, false), ones(2 * n - 4, true);
        auto as_set = [](const std::vector<NodePair>& v) { return std::set<NodePair>(v.begin(), v.end()); };
        bool lo = as_set(generate_shg(n, n, zero)) == as_set(generate_topology(TopologyKind::mesh, n, n));
        bool hi = as_set(generate_shg(n, n, ones)) == as_set(generate_topology(TopologyKind::flattened_butterfly, n, n));
        o.note(fmt("%dx%d: all-zeros == mesh: %s, all-ones == flattened butterfly: %s", n, n, lo ? "yes" : "no",
                   hi ? "yes" : "no"));
        if (!lo || !hi) o.fail(fmt("%dx%d endpoint mismatch", n, n));
    }
    for (auto [n, limit_s] : {std::pair{4, 60.0}, std::pair{10, 7200.0}}) {
        fixtures::TempDir dir;
        dse::Experiment e;
        e.topologies = {TopologyKind::shg};
        e.grid_sizes = {{n, n}};
        e.traffic_patterns = {TrafficPattern::uniform};
        e.packaging_variants = {{"reference", reference_packaging()}};
        e.chiplet_sets = {{"reference", ChipletParams{}}};
        e.routing_algorithms = {RoutingAlgorithm::lowest_id};
        e.seeds = {1};
        e.shg_sweep = true;
        auto t0 = Clock::now();
        auto rows = dse::run_experiments(e, dir.path());
        double dt = seconds_since(t0);
        int64_t errors = std::count_if(rows.begin(), rows.end(), [](const dse::ResultRow& r) { return !r.ok(); });
        int64_t expect = int64_t{1} << (2 * n - 4);
        o.note(fmt("%dx%d sweep: %zu rows (expected %lld), %lld error rows, %.1f s (limit %.0f s)", n, n, rows.size(),
                   static_cast<long long>(expect), static_cast<long long>(errors), dt, limit_s));
        if (static_cast<int64_t>(rows.size()) != expect) o.fail("row count");
        if (errors) o.fail("error rows present");
        if (dt > limit_s) o.fail("too slow");
    }
    return o;
}

// 8 ---------------------------------------------------------------------------
int64_t nonminimal_routes(const RoutingTable& t, const std::vector<NodePair>& links, int n) {
    int64_t bad = 0;
    for (int d = 0; d < n; ++d) {
        auto dist = bfs_distances(n, links, d);
        for (int s = 0; s < n; ++s) {
            if (s == d) continue;
            int cur = s, hops = 0;
            while (cur != d && hops <= n) {
                auto [a, b] = links[t.next_hop[cur].at(d)];
                cur = a == cur ? b : a;
                ++hops;
            }
            if (hops != dist[s]) ++bad;
        }
    }
    return bad;
}

Outcome deadlock_suite() {
    Outcome o;
    auto t0 = Clock::now();
    struct Tally {
        int tables = 0, cyclic = 0, nonminimal_tables = 0;
        int64_t routes = 0, nonminimal = 0;
        std::string first_cyclic, first_nonminimal;
    };
    std::map<std::string, Tally> tally;  // "kind/algorithm"

    auto check = [&](const std::string& kind, int r, int c, const std::vector<NodePair>& links) {
        const int n = r * c;
        for (RoutingAlgorithm alg : {RoutingAlgorithm::lowest_id, RoutingAlgorithm::turn_random}) {
            std::vector<uint64_t> seeds = alg == RoutingAlgorithm::lowest_id ? std::vector<uint64_t>{1}
                                                                              : std::vector<uint64_t>{1, 2, 3, 4, 5};
            Tally& t = tally[kind + "/" + to_string(alg)];
            for (uint64_t seed : seeds) {
                RoutingTable table = generate_routing_table(links, n, n, alg, seed);
                ++t.tables;
                t.routes += static_cast<int64_t>(n) * (n - 1);
                std::string where = fmt("%dx%d seed %llu", r, c, static_cast<unsigned long long>(seed));
                if (!dependency_cycle(table, links, n, n).empty()) {
                    if (!t.cyclic++) t.first_cyclic = where;
                }
                int64_t bad = nonminimal_routes(table, links, n);
                if (bad) {
                    if (!t.nonminimal_tables++) t.first_nonminimal = where;
                    t.nonminimal += bad;
                }
            }
        }
    };

    for (int r = 2; r <= 8; ++r)
        for (int c = 2; c <= 8; ++c) {
            for (TopologyKind k : {TopologyKind::mesh, TopologyKind::torus, TopologyKind::folded_torus,
                                   TopologyKind::flattened_butterfly, TopologyKind::hypercube, TopologyKind::hexamesh}) {
                const int n = r * c;
                if (k == TopologyKind::hypercube && (n & (n - 1)) != 0) continue;
                check(to_string(k), r, c, generate_topology(k, r, c));
            }
            if (r < 3 || c < 3) continue;
            // every bit vector up to 64 of them, otherwise 16 spread over the range including both ends
            const uint64_t total = uint64_t{1} << (r + c - 4);
            std::set<uint64_t> picks;
            if (total <= 64) {
                for (uint64_t i = 0; i < total; ++i) picks.insert(i);
            } else {
                for (uint64_t i = 0; i < 16; ++i) picks.insert(i * (total - 1) / 15);
            }
            for (uint64_t idx : picks) check("shg", r, c, generate_shg(r, c, shg_bits_from_index(idx, r, c)));
        }

    for (const auto& [key, t] : tally) {
        std::string line = fmt("%-32s %5d tables: %4d with dependency cycles, %4d with non-minimal routes (%lld of %lld routes)",
                               key.c_str(), t.tables, t.cyclic, t.nonminimal_tables, static_cast<long long>(t.nonminimal),
                               static_cast<long long>(t.routes));
        if (t.cyclic) line += ", first cycle at " + t.first_cyclic;
        if (t.nonminimal_tables) line += ", first detour at " + t.first_nonminimal;
        o.note(line);
        if (t.cyclic) o.fail(key + " has dependency cycles");
        if (t.nonminimal_tables) o.fail(key + " has non-minimal routes");
    }
    o.note(fmt("%.1f s", seconds_since(t0)));
    if (seconds_since(t0) > 300) o.fail("took longer than 5 min");
    return o;
}

// 9 ---------------------------------------------------------------------------
Outcome brute_force() {
    Outcome o;
    int designs = 0, mismatches = 0;
    for (const auto& [name, b] : corpus::small_designs()) {
        if (b.placement.node_count() > 12) continue;
        IciGraph g = build_ici_graph(b);
        bool ok = edge_flows(g, b.routing_table, b.traffic) == naive::flows(b) &&
                  latency_proxy(g, b.routing_table, b.traffic) == naive::latency(b);
        ++designs;
        if (!ok) {
            ++mismatches;
            o.fail(name);
        }
    }
    o.note(fmt("%d designs with at most 12 nodes, %d mismatches (exact comparison)", designs, mismatches));
    if (designs == 0) o.fail("empty corpus");
    return o;
}

// 10 --------------------------------------------------------------------------
Outcome hotspot() {
    Outcome o;
    int cases = 0;
    double worst = 0;
    for (auto [r, c] : {std::pair{3, 3}, std::pair{4, 4}, std::pair{6, 6}, std::pair{8, 8}, std::pair{10, 10}, std::pair{4, 7}}) {
        for (uint64_t seed = 1; seed <= 5; ++seed) {
            const int n = r * c;
            Traffic t = generate_traffic(TrafficPattern::hotspot, r, c, seed);
            std::vector<double> in(n, 0.0);
            for (const auto& e : t.entries) in[e.dst] += e.amount;
            // hotspots are the nodes receiving more than the common background level
            const double base = *std::min_element(in.begin(), in.end());
            std::vector<int> hot;
            for (int i = 0; i < n; ++i)
                if (in[i] > base * (1 + 1e-9)) hot.push_back(i);
            double share = 0;
            for (int h : hot) share += in[h];
            share /= t.total();
            worst = std::max(worst, std::abs(share - 0.5));
            ++cases;
            if (hot.size() != 4) o.fail(fmt("%dx%d seed %llu: %zu hotspot nodes", r, c, static_cast<unsigned long long>(seed), hot.size()));
            if (std::abs(share - 0.5) > 0.001)
                o.fail(fmt("%dx%d seed %llu: hotspot share %.4f", r, c, static_cast<unsigned long long>(seed), share));
        }
    }
    o.note(fmt("%d patterns, exactly 4 hotspots each, max |share - 50%%| = %.2g", cases, worst));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"hand-oracle latency 32 / 61", hand_oracle},
        {"latency proxy within 10% of simulated zero-load latency", latency_vs_sim},
        {"throughput proxy within 40% of simulated saturation", throughput_vs_sim},
        {"proxy at least 100x faster than a saturation search", speedup},
        {"saturation search probe sequence", search_protocol},
        {"flattened butterfly area overhead 16% +- 1%", area_overhead},
        {"SHG endpoints and sweeps", shg},
        {"routing acyclic and shortest up to 8x8", deadlock_suite},
        {"proxies equal naive recomputation on small designs", brute_force},
        {"hotspot traffic 50% to 4 nodes", hotspot},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::printf("criterion %2d %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str());
        for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d criteria failed\n", failed);
    return failed ? 1 : 0;
}
