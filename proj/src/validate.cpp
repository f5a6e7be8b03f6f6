#include "chipnet/validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "chipnet/geometry.hpp"

namespace chipnet {

const char* to_string(InputKind kind) {
    switch (kind) {
        case InputKind::chiplets: return "chiplets";
        case InputKind::placement: return "placement";
        case InputKind::topology: return "topology";
        case InputKind::packaging: return "packaging";
        case InputKind::routing_table: return "routing_table";
        case InputKind::traffic: return "traffic";
        case InputKind::trace: return "trace";
        case InputKind::technology: return "technology";
        case InputKind::simulator: return "simulator";
    }
    return "?";
}

std::string format_violation(const Violation& v) {
    std::string where = to_string(v.kind);
    if (v.index >= 0) where += "[" + std::to_string(v.index) + "]";
    return where + ": " + v.message;
}

namespace {

constexpr double kFractionSlack = 1e-9;

class Checker {
public:
    explicit Checker(const DesignBundle& b) : b_(b) {}

    ValidationReport run() {
        check_chiplets();
        check_placement();
        check_topology();
        check_packaging();
        check_routing_table();
        check_traffic();
        check_trace();
        check_technology();
        check_simulator();
        return std::move(report_);
    }

private:
    void add(InputKind kind, int index, std::string msg) { report_.push_back({kind, index, std::move(msg)}); }

    static bool finite(double v) { return std::isfinite(v); }

    void check_chiplets() {
        std::set<std::string> names;
        for (int i = 0; i < static_cast<int>(b_.chiplets.size()); ++i) {
            const ChipletDef& c = b_.chiplets[i];
            if (!names.insert(c.name).second) add(InputKind::chiplets, i, "duplicate chiplet name '" + c.name + "'");
            if (!(c.width_mm > 0) || !(c.height_mm > 0) || !finite(c.width_mm) || !finite(c.height_mm))
                add(InputKind::chiplets, i, "width and height must be positive");
            if (!(c.bump_pitch_mm > 0) || !finite(c.bump_pitch_mm))
                add(InputKind::chiplets, i, "bump pitch must be positive");
            if (!(c.internal_latency_cycles >= 0) || !(c.phy_latency_cycles >= 0))
                add(InputKind::chiplets, i, "latencies must be non-negative");
            if (!(c.power_w >= 0)) add(InputKind::chiplets, i, "power must be non-negative");
            double fraction_sum = 0.0;
            for (int p = 0; p < static_cast<int>(c.phys.size()); ++p) {
                const PhyDef& phy = c.phys[p];
                if (!(phy.position.x >= 0 && phy.position.x <= c.width_mm && phy.position.y >= 0 &&
                      phy.position.y <= c.height_mm))
                    add(InputKind::chiplets, i, "PHY " + std::to_string(p) + " lies outside the footprint");
                if (!(phy.area_fraction > 0 && phy.area_fraction <= 1))
                    add(InputKind::chiplets, i, "PHY " + std::to_string(p) + " area fraction must be in (0, 1]");
                fraction_sum += phy.area_fraction;
            }
            if (fraction_sum > 1.0 + kFractionSlack)
                add(InputKind::chiplets, i, "PHY area fractions sum to more than 1");
        }
    }

    void check_placement() {
        const auto& inst = b_.placement.instances;
        std::vector<std::pair<Rect, int>> rects;
        for (int i = 0; i < static_cast<int>(inst.size()); ++i) {
            const ChipletDef* def = b_.find_chiplet(inst[i].chiplet_name);
            if (!def) {
                add(InputKind::placement, i, "chiplet '" + inst[i].chiplet_name + "' is not in the chiplet library");
                continue;
            }
            if (!finite(inst[i].position.x) || !finite(inst[i].position.y)) {
                add(InputKind::placement, i, "position is not finite");
                continue;
            }
            rects.push_back({footprint(*def, inst[i]), i});
        }
        // Sweep along x; only rectangles whose x-ranges intersect can overlap.
        std::sort(rects.begin(), rects.end(), [](const auto& a, const auto& b) { return a.first.x0 < b.first.x0; });
        for (std::size_t a = 0; a < rects.size(); ++a) {
            for (std::size_t c = a + 1; c < rects.size() && rects[c].first.x0 < rects[a].first.x1; ++c) {
                if (interiors_overlap(rects[a].first, rects[c].first)) {
                    int lo = std::min(rects[a].second, rects[c].second);
                    int hi = std::max(rects[a].second, rects[c].second);
                    add(InputKind::placement, hi, "chiplet instance overlaps instance " + std::to_string(lo));
                }
            }
        }
        if (!b_.placement.interposer_routers.empty() && !b_.packaging.has_active_interposer)
            add(InputKind::placement, -1, "interposer routers require an active interposer");
        if (inst.empty()) add(InputKind::placement, -1, "placement has no chiplets");
    }

    bool endpoint_ok(const Endpoint& e, int link, const char* side) {
        if (e.kind == EndpointKind::interposer_router) {
            if (e.index < 0 || e.index >= static_cast<int>(b_.placement.interposer_routers.size())) {
                add(InputKind::topology, link, std::string("endpoint ") + side + " names a missing interposer router");
                return false;
            }
            return true;
        }
        if (e.index < 0 || e.index >= b_.placement.chiplet_count()) {
            add(InputKind::topology, link, std::string("endpoint ") + side + " names a missing chiplet instance");
            return false;
        }
        const ChipletDef* def = b_.find_chiplet(b_.placement.instances[e.index].chiplet_name);
        if (!def) return false;  // reported under placement
        if (e.phy_index < 0 || e.phy_index >= static_cast<int>(def->phys.size())) {
            add(InputKind::topology, link, std::string("endpoint ") + side + " names a missing PHY");
            return false;
        }
        return true;
    }

    int node_of(const Endpoint& e) const {
        return e.kind == EndpointKind::chiplet ? e.index : b_.placement.chiplet_count() + e.index;
    }

    void check_topology() {
        const auto& links = b_.topology.links;
        int n = b_.placement.node_count();
        std::set<std::pair<int, int>> pairs;
        std::set<std::pair<int, int>> used_phys;
        std::vector<int> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        link_ok_.assign(links.size(), false);
        for (int i = 0; i < static_cast<int>(links.size()); ++i) {
            bool ok_a = endpoint_ok(links[i].a, i, "a");
            bool ok_b = endpoint_ok(links[i].b, i, "b");
            if (!ok_a || !ok_b) continue;
            int u = node_of(links[i].a);
            int v = node_of(links[i].b);
            if (u == v) {
                add(InputKind::topology, i, "self-link");
                continue;
            }
            if (!pairs.insert({std::min(u, v), std::max(u, v)}).second) add(InputKind::topology, i, "duplicate link");
            for (const Endpoint* e : {&links[i].a, &links[i].b}) {
                if (e->kind == EndpointKind::chiplet && !used_phys.insert({e->index, e->phy_index}).second)
                    add(InputKind::topology, i,
                        "PHY " + std::to_string(e->phy_index) + " of chiplet instance " + std::to_string(e->index) +
                            " is used by more than one link");
            }
            parent[find(u)] = find(v);
            link_ok_[i] = true;
        }
        int chiplets = b_.placement.chiplet_count();
        for (int c = 1; c < chiplets; ++c) {
            if (find(c) != find(0)) {
                add(InputKind::topology, -1, "chiplet instance " + std::to_string(c) + " is not connected to instance 0");
                break;
            }
        }
    }

    void check_packaging() {
        const Packaging& p = b_.packaging;
        double link_lat = std::holds_alternative<ConstantLatency>(p.link_latency)
                              ? std::get<ConstantLatency>(p.link_latency).cycles
                              : std::get<PerMmLatency>(p.link_latency).cycles_per_mm;
        if (!(p.router_latency_cycles >= 0) || !(link_lat >= 0) || !(p.link_power_per_mm_w >= 0) ||
            !(p.interposer_power_w >= 0) || !(p.packaging_cost >= 0) || p.non_data_wires < 0)
            add(InputKind::packaging, -1, "packaging magnitudes must be non-negative");
    }

    void check_routing_table() {
        const auto& table = b_.routing_table.next_hop;
        int n = b_.placement.node_count();
        int chiplets = b_.placement.chiplet_count();
        if (static_cast<int>(table.size()) != n) {
            add(InputKind::routing_table, -1,
                "routing table lists " + std::to_string(table.size()) + " nodes, design has " + std::to_string(n));
            return;
        }
        const auto& links = b_.topology.links;
        bool entries_ok = true;
        for (int node = 0; node < n; ++node) {
            for (const auto& [dst, link] : table[node]) {
                if (dst < 0 || dst >= chiplets) {
                    add(InputKind::routing_table, node, "destination " + std::to_string(dst) + " is not a chiplet");
                    entries_ok = false;
                } else if (link < 0 || link >= static_cast<int>(links.size()) || !link_ok_[link] ||
                           (node_of(links[link].a) != node && node_of(links[link].b) != node)) {
                    add(InputKind::routing_table, node,
                        "entry for destination " + std::to_string(dst) + " uses link " + std::to_string(link) +
                            ", which is not attached to this node");
                    entries_ok = false;
                }
            }
        }
        if (!entries_ok) return;

        // Per destination, walk every chiplet source with memoization: 2 = reaches dst.
        std::vector<int> state(n);
        std::vector<int> stack;
        for (int d = 0; d < chiplets; ++d) {
            std::fill(state.begin(), state.end(), 0);
            state[d] = 2;
            for (int s = 0; s < chiplets; ++s) {
                if (state[s] != 0) continue;
                stack.clear();
                int cur = s;
                bool failed = false;
                while (state[cur] == 0) {
                    state[cur] = 1;
                    stack.push_back(cur);
                    auto it = table[cur].find(d);
                    if (it == table[cur].end()) {
                        add(InputKind::routing_table, cur,
                            "no entry for destination " + std::to_string(d) + " (needed by source " + std::to_string(s) + ")");
                        failed = true;
                        break;
                    }
                    const Link& l = links[it->second];
                    cur = node_of(l.a) == cur ? node_of(l.b) : node_of(l.a);
                }
                if (!failed && state[cur] == 1) {
                    add(InputKind::routing_table, cur, "routing loop towards destination " + std::to_string(d));
                    failed = true;
                }
                if (!failed && state[cur] == 3) failed = true;  // joins a path already reported
                for (int v : stack) state[v] = failed ? 3 : 2;
            }
        }
    }

    void check_traffic() {
        int chiplets = b_.placement.chiplet_count();
        double total = 0.0;
        for (int i = 0; i < static_cast<int>(b_.traffic.entries.size()); ++i) {
            const TrafficEntry& e = b_.traffic.entries[i];
            if (e.src < 0 || e.src >= chiplets || e.dst < 0 || e.dst >= chiplets)
                add(InputKind::traffic, i, "source or destination is not a chiplet instance");
            else if (e.src == e.dst)
                add(InputKind::traffic, i, "source equals destination");
            if (!(e.amount >= 0) || !finite(e.amount)) add(InputKind::traffic, i, "amount must be a non-negative number");
            total += e.amount;
        }
        if (!(total > 0)) add(InputKind::traffic, -1, "total traffic must be positive");
    }

    void check_trace() {
        if (!b_.trace) return;
        const auto& msgs = b_.trace->messages;
        int chiplets = b_.placement.chiplet_count();
        std::unordered_map<int64_t, int> by_id;
        for (int i = 0; i < static_cast<int>(msgs.size()); ++i) {
            if (!by_id.emplace(msgs[i].id, i).second) add(InputKind::trace, i, "duplicate message id");
            const auto& m = msgs[i];
            if (m.src < 0 || m.src >= chiplets || m.dst < 0 || m.dst >= chiplets)
                add(InputKind::trace, i, "source or destination is not a chiplet instance");
            else if (m.src == m.dst)
                add(InputKind::trace, i, "source equals destination");
            if (m.size_flits < 1) add(InputKind::trace, i, "size must be at least one flit");
            if (m.earliest_injection_cycle < 0) add(InputKind::trace, i, "injection cycle must be non-negative");
        }
        // Kahn's algorithm over message -> dependency edges.
        std::vector<int> indegree(msgs.size(), 0);
        std::vector<std::vector<int>> dependents(msgs.size());
        for (int i = 0; i < static_cast<int>(msgs.size()); ++i) {
            for (int64_t dep : msgs[i].deps) {
                auto it = by_id.find(dep);
                if (it == by_id.end()) {
                    add(InputKind::trace, i, "dependency on unknown message " + std::to_string(dep));
                    continue;
                }
                dependents[it->second].push_back(i);
                ++indegree[i];
            }
        }
        std::vector<int> ready;
        for (int i = 0; i < static_cast<int>(msgs.size()); ++i)
            if (indegree[i] == 0) ready.push_back(i);
        std::size_t seen = 0;
        while (!ready.empty()) {
            int i = ready.back();
            ready.pop_back();
            ++seen;
            for (int j : dependents[i])
                if (--indegree[j] == 0) ready.push_back(j);
        }
        if (seen != msgs.size()) add(InputKind::trace, -1, "message dependencies contain a cycle");
    }

    void check_technology() {
        const Technology& t = b_.technology;
        std::set<std::string> names;
        for (int i = 0; i < static_cast<int>(t.nodes.size()); ++i) {
            const TechNode& n = t.nodes[i];
            if (!names.insert(n.name).second) add(InputKind::technology, i, "duplicate technology node name");
            if (!(n.wafer_diameter_mm > 0) || !(n.wafer_cost > 0) || !(n.clustering_parameter > 0) ||
                !(n.defect_density_per_mm2 >= 0))
                add(InputKind::technology, i, "technology parameters out of range");
        }
        std::set<std::string> used;
        for (const auto& inst : b_.placement.instances) used.insert(inst.chiplet_name);
        for (const auto& name : used) {
            auto it = t.assignment.find(name);
            if (it == t.assignment.end())
                add(InputKind::technology, -1, "chiplet '" + name + "' has no technology node");
            else if (!names.count(it->second))
                add(InputKind::technology, -1, "chiplet '" + name + "' uses unknown technology node '" + it->second + "'");
        }
    }

    void check_simulator() {
        if (!b_.simulator) return;
        const SimParams& p = *b_.simulator;
        if (p.vcs_per_port < 1 || p.buffer_flits_per_vc < 1 || p.packet_size_flits < 1 || p.warmup_cycles < 0 ||
            p.measurement_cycles < 0 || p.drain_cycle_limit < 1)
            add(InputKind::simulator, -1, "simulator counts out of range");
        if (!(p.latency_saturation_factor > 1)) add(InputKind::simulator, -1, "latency saturation factor must exceed 1");
    }

    const DesignBundle& b_;
    ValidationReport report_;
    std::vector<bool> link_ok_;
};

}  // namespace

ValidationReport validate(const DesignBundle& bundle) { return Checker(bundle).run(); }

}  // namespace chipnet
