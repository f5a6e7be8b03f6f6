#pragma once

// Straight-from-the-definitions recomputation of the proxies: walks the
// routing table hop by hop over the raw bundle, with no graph build and no
// shared code beyond point geometry.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "chipnet/geometry.hpp"
#include "chipnet/model.hpp"

namespace naive {

inline int node_of(const chipnet::DesignBundle& b, const chipnet::Endpoint& e) {
    return e.kind == chipnet::EndpointKind::chiplet ? e.index : b.placement.chiplet_count() + e.index;
}

inline double node_weight(const chipnet::DesignBundle& b, int node) {
    if (node < b.placement.chiplet_count()) return b.chiplet_of(node).internal_latency_cycles;
    return b.packaging.router_latency_cycles;
}

inline double link_weight(const chipnet::DesignBundle& b, int link) {
    const auto& l = b.topology.links[link];
    double w = 0.0;
    if (const auto* c = std::get_if<chipnet::ConstantLatency>(&b.packaging.link_latency)) {
        w = c->cycles;
    } else {
        double len = chipnet::link_length(chipnet::endpoint_position(b, l.a), chipnet::endpoint_position(b, l.b),
                                          b.packaging.link_routing);
        w = std::get<chipnet::PerMmLatency>(b.packaging.link_latency).cycles_per_mm * len;
    }
    for (const auto* e : {&l.a, &l.b})
        if (e->kind == chipnet::EndpointKind::chiplet) w += b.chiplet_of(e->index).phy_latency_cycles;
    return w;
}

inline double link_bandwidth(const chipnet::DesignBundle& b, int link) {
    const auto& l = b.topology.links[link];
    double best = std::numeric_limits<double>::infinity();
    for (const auto* e : {&l.a, &l.b}) {
        if (e->kind != chipnet::EndpointKind::chiplet) continue;
        const auto& c = b.chiplet_of(e->index);
        double wires = std::floor(c.area_mm2() * c.phys[e->phy_index].area_fraction /
                                  (c.bump_pitch_mm * c.bump_pitch_mm)) -
                       b.packaging.non_data_wires;
        best = std::min(best, wires);
    }
    return best;
}

// Links used from src to dst, in order.
inline std::vector<int> walk(const chipnet::DesignBundle& b, int src, int dst) {
    std::vector<int> links;
    int cur = src;
    while (cur != dst) {
        int link = b.routing_table.next_hop.at(cur).at(dst);
        links.push_back(link);
        const auto& l = b.topology.links[link];
        int u = node_of(b, l.a), v = node_of(b, l.b);
        cur = cur == u ? v : u;
        if (links.size() > static_cast<std::size_t>(b.placement.node_count())) throw std::runtime_error("loop");
    }
    return links;
}

inline double path_latency(const chipnet::DesignBundle& b, int src, int dst) {
    double lat = node_weight(b, src);
    int cur = src;
    for (int link : walk(b, src, dst)) {
        const auto& l = b.topology.links[link];
        int u = node_of(b, l.a), v = node_of(b, l.b);
        cur = cur == u ? v : u;
        lat += link_weight(b, link) + node_weight(b, cur);
    }
    return lat;
}

inline double latency(const chipnet::DesignBundle& b) {
    double num = 0.0, den = 0.0;
    for (const auto& e : b.traffic.entries) {
        num += e.amount * path_latency(b, e.src, e.dst);
        den += e.amount;
    }
    return num / den;
}

inline std::vector<double> flows(const chipnet::DesignBundle& b) {
    std::vector<double> f(b.topology.links.size(), 0.0);
    for (const auto& e : b.traffic.entries)
        for (int link : walk(b, e.src, e.dst)) f[link] += e.amount;
    return f;
}

inline double throughput(const chipnet::DesignBundle& b) {
    auto f = flows(b);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] > 0) best = std::min(best, link_bandwidth(b, static_cast<int>(i)) / f[i]);
    double total = 0.0;
    for (const auto& e : b.traffic.entries) total += e.amount;
    return best * total;
}

}  // namespace naive
