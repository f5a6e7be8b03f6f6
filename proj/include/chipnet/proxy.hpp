#pragma once

// Analytical latency and throughput proxies over the weighted ICI graph.
//
// Vertices are chiplet instances and interposer routers; every topology link is
// one undirected edge. Edge weight = link latency + one PHY latency per chiplet
// endpoint. A path's latency counts every vertex and every edge it touches.
// One wire carries one traffic unit per cycle, so B/F is dimensionless.

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "chipnet/model.hpp"
#include "chipnet/reports.hpp"

namespace chipnet {

struct EdgeEnd {
    int node = 0;
    bool is_chiplet = false;
    double chiplet_area_mm2 = 0.0;
    double phy_fraction = 0.0;
    double bump_pitch_mm = 0.0;
};

struct IciEdge {
    int u = 0;
    int v = 0;
    double weight = 0.0;       // cycles
    double link_cycles = 0.0;  // link-latency share of `weight`
    double phy_cycles = 0.0;   // PHY share of `weight`
    double length_mm = 0.0;
    double bandwidth = 0.0;  // wires
    EdgeEnd ends[2];

    int other(int node) const { return node == u ? v : u; }
};

struct IciGraph {
    int chiplet_count = 0;
    std::vector<double> vertex_weight;  // cycles, indexed by node
    std::vector<IciEdge> edges;         // indexed by topology link

    int node_count() const { return static_cast<int>(vertex_weight.size()); }
};

IciGraph build_ici_graph(const DesignBundle& bundle);

// floor(area * fraction / pitch^2) - non_data_wires; throws when not positive.
int64_t edge_bandwidth(double area_mm2, double fraction, double pitch_mm, int non_data_wires);

struct Route {
    std::vector<int> vertices;
    std::vector<int> edges;
};

Route route(const IciGraph& graph, const RoutingTable& table, int src, int dst);

double latency_proxy(const IciGraph& graph, const RoutingTable& table, const Traffic& traffic);
std::vector<double> edge_flows(const IciGraph& graph, const RoutingTable& table, const Traffic& traffic);

struct ThroughputResult {
    double throughput = 0.0;
    int bottleneck_edge = -1;
};

ThroughputResult throughput_proxy(const IciGraph& graph, const RoutingTable& table, const Traffic& traffic);

// Latency, flows and throughput from one pass over the routing trees.
struct ProxyResult {
    double avg_latency_cycles = 0.0;
    double throughput = 0.0;
    int bottleneck_edge = -1;
    double total_traffic = 0.0;
    std::vector<double> flows;
};

ProxyResult evaluate_proxies(const IciGraph& graph, const RoutingTable& table, const Traffic& traffic);

// Proxy throughput expressed as flits per chiplet per cycle: each link direction
// moves one flit per cycle over half of the bottleneck link's wires.
double normalized_throughput(const ProxyResult& result, const IciGraph& graph);

struct PerfReport {
    double avg_latency_cycles = 0.0;
    double throughput_units = 0.0;
    double throughput_rate = 0.0;  // normalized, flits/chiplet/cycle
    int bottleneck_edge = -1;
    AreaReport area;
    double power_w = 0.0;
    std::optional<CostBreakdown> cost;  // absent when no technology data is usable
    std::vector<double> edge_bandwidth;
    std::vector<double> edge_flow;
};

// Full proxy evaluation of a valid bundle.
PerfReport estimate(const DesignBundle& bundle);

nlohmann::json to_json(const PerfReport& report, bool include_edges);

}  // namespace chipnet
