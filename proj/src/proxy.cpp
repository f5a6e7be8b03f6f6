#include "chipnet/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chipnet/geometry.hpp"
#include "chipnet/kernels.hpp"

namespace chipnet {

int64_t edge_bandwidth(double area_mm2, double fraction, double pitch_mm, int non_data_wires) {
    if (!(pitch_mm > 0)) throw ModelError("bump pitch must be positive");
    if (!(fraction > 0 && fraction <= 1)) throw ModelError("PHY area fraction must be in (0, 1]");
    double bumps = std::floor(area_mm2 * fraction / (pitch_mm * pitch_mm));
    int64_t wires = static_cast<int64_t>(bumps) - non_data_wires;
    if (wires <= 0) throw ModelError("link has no data wires");
    return wires;
}

IciGraph build_ici_graph(const DesignBundle& bundle) {
    IciGraph g;
    const Placement& pl = bundle.placement;
    g.chiplet_count = pl.chiplet_count();
    g.vertex_weight.resize(pl.node_count());
    for (int i = 0; i < g.chiplet_count; ++i) g.vertex_weight[i] = bundle.chiplet_of(i).internal_latency_cycles;
    for (int r = 0; r < static_cast<int>(pl.interposer_routers.size()); ++r)
        g.vertex_weight[g.chiplet_count + r] = bundle.packaging.router_latency_cycles;

    const auto& links = bundle.topology.links;
    std::vector<double> lengths = link_lengths(bundle);
    std::vector<double> phy_cycles(links.size(), 0.0);
    g.edges.resize(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
        IciEdge& e = g.edges[i];
        e.length_mm = lengths[i];
        e.bandwidth = std::numeric_limits<double>::infinity();
        const Endpoint* ends[2] = {&links[i].a, &links[i].b};
        for (int k = 0; k < 2; ++k) {
            const Endpoint& ep = *ends[k];
            EdgeEnd& end = e.ends[k];
            end.node = ep.kind == EndpointKind::chiplet ? ep.index : g.chiplet_count + ep.index;
            if (ep.kind != EndpointKind::chiplet) continue;
            const ChipletDef& c = bundle.chiplet_of(ep.index);
            end.is_chiplet = true;
            end.chiplet_area_mm2 = c.area_mm2();
            end.phy_fraction = c.phys.at(ep.phy_index).area_fraction;
            end.bump_pitch_mm = c.bump_pitch_mm;
            phy_cycles[i] += c.phy_latency_cycles;
            try {
                double b = static_cast<double>(edge_bandwidth(end.chiplet_area_mm2, end.phy_fraction,
                                                              end.bump_pitch_mm, bundle.packaging.non_data_wires));
                e.bandwidth = std::min(e.bandwidth, b);
            } catch (const ModelError& err) {
                throw ModelError("link " + std::to_string(i) + ": " + err.what());
            }
        }
        e.u = e.ends[0].node;
        e.v = e.ends[1].node;
        e.phy_cycles = phy_cycles[i];
    }

    std::vector<double> weights(links.size());
    if (const auto* per_mm = std::get_if<PerMmLatency>(&bundle.packaging.link_latency)) {
        kernels::affine(phy_cycles, per_mm->cycles_per_mm, lengths, weights);
        for (std::size_t i = 0; i < links.size(); ++i) g.edges[i].link_cycles = per_mm->cycles_per_mm * lengths[i];
    } else {
        double constant = std::get<ConstantLatency>(bundle.packaging.link_latency).cycles;
        for (std::size_t i = 0; i < links.size(); ++i) {
            weights[i] = phy_cycles[i] + constant;
            g.edges[i].link_cycles = constant;
        }
    }
    for (std::size_t i = 0; i < links.size(); ++i) g.edges[i].weight = weights[i];
    return g;
}

namespace {

int next_edge_of(const IciGraph& g, const RoutingTable& table, int node, int dst) {
    if (node >= static_cast<int>(table.next_hop.size()))
        throw ModelError("routing table has no row for node " + std::to_string(node));
    const auto& row = table.next_hop[node];
    auto it = row.find(dst);
    if (it == row.end())
        throw ModelError("node " + std::to_string(node) + " has no route to " + std::to_string(dst));
    int e = it->second;
    if (e < 0 || e >= static_cast<int>(g.edges.size()) || (g.edges[e].u != node && g.edges[e].v != node))
        throw ModelError("node " + std::to_string(node) + " routes " + std::to_string(dst) + " over foreign link " +
                         std::to_string(e));
    return e;
}

// Next-hop trees, one destination at a time. Every source is walked until it
// meets an already-resolved node, so each tree costs O(|V|).
class TreeWalker {
public:
    TreeWalker(const IciGraph& g, const RoutingTable& table)
        : g_(g), table_(table), n_(g.node_count()), state_(n_, 0), next_edge_(n_, -1), depth_(n_, 0), lat_(n_, 0.0),
          acc_(n_, 0.0) {}

    void begin(int dst) {
        for (int v : touched_) {
            state_[v] = 0;
            acc_[v] = 0.0;
        }
        touched_.clear();
        dst_ = dst;
        mark(dst);
        state_[dst] = 2;
        depth_[dst] = 0;
        lat_[dst] = g_.vertex_weight[dst];
        max_depth_ = 0;
    }

    void resolve(int src) {
        stack_.clear();
        int cur = src;
        while (state_[cur] == 0) {
            mark(cur);
            state_[cur] = 1;
            stack_.push_back(cur);
            int e = next_edge_of(g_, table_, cur, dst_);
            next_edge_[cur] = e;
            cur = g_.edges[e].other(cur);
        }
        if (state_[cur] == 1)
            throw ModelError("routing loop from " + std::to_string(src) + " towards " + std::to_string(dst_));
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
            int v = *it;
            const IciEdge& e = g_.edges[next_edge_[v]];
            int nxt = e.other(v);
            lat_[v] = g_.vertex_weight[v] + e.weight + lat_[nxt];
            depth_[v] = depth_[nxt] + 1;
            max_depth_ = std::max(max_depth_, depth_[v]);
            state_[v] = 2;
        }
    }

    double latency(int src) const { return lat_[src]; }
    void add_demand(int src, double amount) { acc_[src] += amount; }

    // Pushes accumulated demand down the tree, deepest nodes first.
    void accumulate_flows(std::vector<double>& flows) {
        buckets_.assign(max_depth_ + 1, {});
        for (int v : touched_)
            if (v != dst_) buckets_[depth_[v]].push_back(v);
        for (int d = max_depth_; d >= 1; --d) {
            for (int v : buckets_[d]) {
                if (acc_[v] == 0.0) continue;
                int e = next_edge_[v];
                flows[e] += acc_[v];
                acc_[g_.edges[e].other(v)] += acc_[v];
            }
        }
    }

private:
    void mark(int v) { touched_.push_back(v); }

    const IciGraph& g_;
    const RoutingTable& table_;
    int n_;
    int dst_ = 0;
    int max_depth_ = 0;
    std::vector<int> state_;  // 0 unseen, 1 on stack, 2 resolved
    std::vector<int> next_edge_;
    std::vector<int> depth_;
    std::vector<double> lat_;
    std::vector<double> acc_;
    std::vector<int> touched_;
    std::vector<int> stack_;
    std::vector<std::vector<int>> buckets_;
};

void check_entry(const IciGraph& g, const TrafficEntry& e) {
    if (e.src < 0 || e.src >= g.chiplet_count || e.dst < 0 || e.dst >= g.chiplet_count)
        throw ModelError("traffic entry references a missing chiplet");
    if (e.src == e.dst) throw ModelError("traffic entry with source equal to destination");
}

}  // namespace

Route route(const IciGraph& graph, const RoutingTable& table, int src, int dst) {
    if (src == dst) throw ModelError("route needs distinct source and destination");
    if (src < 0 || src >= graph.chiplet_count || dst < 0 || dst >= graph.chiplet_count)
        throw ModelError("route endpoints must be chiplet instances");
    Route r;
    r.vertices.push_back(src);
    int cur = src;
    while (cur != dst) {
        if (static_cast<int>(r.edges.size()) >= graph.node_count())
            throw ModelError("routing loop from " + std::to_string(src) + " towards " + std::to_string(dst));
        int e = next_edge_of(graph, table, cur, dst);
        r.edges.push_back(e);
        cur = graph.edges[e].other(cur);
        r.vertices.push_back(cur);
    }
    return r;
}

ProxyResult evaluate_proxies(const IciGraph& graph, const RoutingTable& table, const Traffic& traffic) {
    const auto& entries = traffic.entries;
    std::vector<std::vector<int>> by_dst(graph.chiplet_count);
    for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
        check_entry(graph, entries[i]);
        by_dst[entries[i].dst].push_back(i);
    }

    ProxyResult out;
    out.flows.assign(graph.edges.size(), 0.0);
    std::vector<double> amounts(entries.size());
    std::vector<double> path_latency(entries.size());
    TreeWalker walker(graph, table);
    for (int d = 0; d < graph.chiplet_count; ++d) {
        if (by_dst[d].empty()) continue;
        walker.begin(d);
        for (int i : by_dst[d]) {
            walker.resolve(entries[i].src);
            walker.add_demand(entries[i].src, entries[i].amount);
            path_latency[i] = walker.latency(entries[i].src);
        }
        walker.accumulate_flows(out.flows);
    }
    for (std::size_t i = 0; i < entries.size(); ++i) amounts[i] = entries[i].amount;

    kernels::WeightedSum ws = kernels::weighted_sum(amounts, path_latency);
    if (!(ws.weight > 0)) throw ModelError("total traffic is zero");
    out.total_traffic = ws.weight;
    out.avg_latency_cycles = ws.weighted / ws.weight;

    std::vector<double> bandwidth(graph.edges.size());
    for (std::size_t i = 0; i < graph.edges.size(); ++i) bandwidth[i] = graph.edges[i].bandwidth;
    kernels::MinRatio mr = kernels::min_ratio(bandwidth, out.flows);
    if (mr.index < 0) throw ModelError("no edge carries flow");
    out.throughput = mr.ratio * ws.weight;
    out.bottleneck_edge = static_cast<int>(mr.index);
    return out;
}

double latency_proxy(const IciGraph& graph, const RoutingTable& table, const Traffic& traffic) {
    const auto& entries = traffic.entries;
    std::vector<std::vector<int>> by_dst(graph.chiplet_count);
    for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
        check_entry(graph, entries[i]);
        by_dst[entries[i].dst].push_back(i);
    }
    std::vector<double> amounts(entries.size());
    std::vector<double> path_latency(entries.size());
    TreeWalker walker(graph, table);
    for (int d = 0; d < graph.chiplet_count; ++d) {
        if (by_dst[d].empty()) continue;
        walker.begin(d);
        for (int i : by_dst[d]) {
            walker.resolve(entries[i].src);
            path_latency[i] = walker.latency(entries[i].src);
            amounts[i] = entries[i].amount;
        }
    }
    kernels::WeightedSum ws = kernels::weighted_sum(amounts, path_latency);
    if (!(ws.weight > 0)) throw ModelError("total traffic is zero");
    return ws.weighted / ws.weight;
}

std::vector<double> edge_flows(const IciGraph& graph, const RoutingTable& table, const Traffic& traffic) {
    const auto& entries = traffic.entries;
    std::vector<std::vector<int>> by_dst(graph.chiplet_count);
    for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
        check_entry(graph, entries[i]);
        by_dst[entries[i].dst].push_back(i);
    }
    std::vector<double> flows(graph.edges.size(), 0.0);
    TreeWalker walker(graph, table);
    for (int d = 0; d < graph.chiplet_count; ++d) {
        if (by_dst[d].empty()) continue;
        walker.begin(d);
        for (int i : by_dst[d]) {
            walker.resolve(entries[i].src);
            walker.add_demand(entries[i].src, entries[i].amount);
        }
        walker.accumulate_flows(flows);
    }
    return flows;
}

ThroughputResult throughput_proxy(const IciGraph& graph, const RoutingTable& table, const Traffic& traffic) {
    ProxyResult r = evaluate_proxies(graph, table, traffic);
    return {r.throughput, r.bottleneck_edge};
}

double normalized_throughput(const ProxyResult& result, const IciGraph& graph) {
    if (result.bottleneck_edge < 0 || graph.chiplet_count == 0) return 0.0;
    double wires = graph.edges[result.bottleneck_edge].bandwidth;
    return 2.0 * result.throughput / (static_cast<double>(graph.chiplet_count) * wires);
}

PerfReport estimate(const DesignBundle& bundle) {
    IciGraph g = build_ici_graph(bundle);
    ProxyResult pr = evaluate_proxies(g, bundle.routing_table, bundle.traffic);
    PerfReport rep;
    rep.avg_latency_cycles = pr.avg_latency_cycles;
    rep.throughput_units = pr.throughput;
    rep.throughput_rate = normalized_throughput(pr, g);
    rep.bottleneck_edge = pr.bottleneck_edge;
    rep.area = area_report(bundle);
    rep.power_w = power_report(bundle);
    rep.cost = cost_report(bundle);
    rep.edge_bandwidth.reserve(g.edges.size());
    for (const auto& e : g.edges) rep.edge_bandwidth.push_back(e.bandwidth);
    rep.edge_flow = std::move(pr.flows);
    return rep;
}

nlohmann::json to_json(const PerfReport& r, bool include_edges) {
    nlohmann::json j;
    j["latency_cycles"] = r.avg_latency_cycles;
    j["throughput"] = r.throughput_units;
    j["throughput_rate"] = r.throughput_rate;
    j["bottleneck_link"] = r.bottleneck_edge;
    j["area"] = {{"chiplet_area_sum_mm2", r.area.chiplet_area_sum_mm2},
                 {"interposer_area_mm2", r.area.interposer_area_mm2}};
    j["power_w"] = r.power_w;
    if (r.cost) {
        nlohmann::json lines = nlohmann::json::array();
        for (const auto& l : r.cost->per_chiplet)
            lines.push_back({{"chiplet", l.chiplet},
                             {"area_mm2", l.area_mm2},
                             {"yield", l.yield},
                             {"dies_per_wafer", l.dies_per_wafer},
                             {"die_cost", l.die_cost},
                             {"instances", l.instances}});
        j["cost"] = {{"per_chiplet", std::move(lines)},
                     {"packaging_cost", r.cost->packaging_cost},
                     {"total_cost", r.cost->total_cost}};
    }
    if (include_edges) {
        nlohmann::json edges = nlohmann::json::array();
        for (std::size_t i = 0; i < r.edge_flow.size(); ++i) {
            nlohmann::json bw = std::isfinite(r.edge_bandwidth[i]) ? nlohmann::json(r.edge_bandwidth[i])
                                                                    : nlohmann::json("unbounded");
            edges.push_back({{"link", i}, {"bandwidth", std::move(bw)}, {"flow", r.edge_flow[i]}});
        }
        j["edges"] = std::move(edges);
    }
    return j;
}

}  // namespace chipnet
