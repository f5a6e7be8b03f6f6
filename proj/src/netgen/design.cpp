#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "chipnet/geometry.hpp"
#include "chipnet/netgen.hpp"

namespace chipnet::netgen {

namespace {

template <class E, std::size_t N>
E parse_enum(const std::string& s, const E (&values)[N], const char* what) {
    for (E v : values)
        if (s == to_string(v)) return v;
    std::string msg = std::string("unknown ") + what + " '" + s + "' (expected";
    for (std::size_t i = 0; i < N; ++i) msg += std::string(i ? ", " : " ") + to_string(values[i]);
    throw GeneratorError(msg + ")");
}

// Point at arc length s along the perimeter, counter-clockwise from the
// lower-left corner.
Point perimeter_point(double s, double w, double h) {
    if (s < w) return {s, 0.0};
    s -= w;
    if (s < h) return {w, s};
    s -= h;
    if (s < w) return {w - s, h};
    s -= w;
    return {0.0, h - s};
}

}  // namespace

const char* to_string(PhyPlacementStyle v) {
    switch (v) {
        case PhyPlacementStyle::perimeter_even: return "perimeter_even";
        case PhyPlacementStyle::corners: return "corners";
        case PhyPlacementStyle::edge_centers: return "edge_centers";
        case PhyPlacementStyle::row_banks: return "row_banks";
    }
    return "?";
}

const char* to_string(PlacementKind v) { return v == PlacementKind::grid ? "grid" : "hex"; }

const char* to_string(TopologyKind v) {
    switch (v) {
        case TopologyKind::mesh: return "mesh";
        case TopologyKind::torus: return "torus";
        case TopologyKind::folded_torus: return "folded_torus";
        case TopologyKind::flattened_butterfly: return "flattened_butterfly";
        case TopologyKind::hypercube: return "hypercube";
        case TopologyKind::hexamesh: return "hexamesh";
        case TopologyKind::shg: return "shg";
    }
    return "?";
}

const char* to_string(RoutingAlgorithm v) { return v == RoutingAlgorithm::lowest_id ? "lowest_id" : "turn_random"; }

const char* to_string(TrafficPattern v) {
    switch (v) {
        case TrafficPattern::uniform: return "uniform";
        case TrafficPattern::transpose: return "transpose";
        case TrafficPattern::permutation: return "permutation";
        case TrafficPattern::hotspot: return "hotspot";
    }
    return "?";
}

PhyPlacementStyle parse_phy_style(const std::string& s) {
    static const PhyPlacementStyle all[] = {PhyPlacementStyle::perimeter_even, PhyPlacementStyle::corners,
                                            PhyPlacementStyle::edge_centers, PhyPlacementStyle::row_banks};
    return parse_enum(s, all, "PHY placement style");
}

TopologyKind parse_topology(const std::string& s) {
    static const TopologyKind all[] = {TopologyKind::mesh,      TopologyKind::torus,
                                       TopologyKind::folded_torus, TopologyKind::flattened_butterfly,
                                       TopologyKind::hypercube, TopologyKind::hexamesh,
                                       TopologyKind::shg};
    return parse_enum(s, all, "topology");
}

RoutingAlgorithm parse_routing(const std::string& s) {
    static const RoutingAlgorithm all[] = {RoutingAlgorithm::lowest_id, RoutingAlgorithm::turn_random};
    return parse_enum(s, all, "routing algorithm");
}

TrafficPattern parse_traffic(const std::string& s) {
    static const TrafficPattern all[] = {TrafficPattern::uniform, TrafficPattern::transpose,
                                         TrafficPattern::permutation, TrafficPattern::hotspot};
    return parse_enum(s, all, "traffic pattern");
}

std::vector<Point> phy_layout(PhyPlacementStyle style, int phy_count, double width, double height) {
    if (phy_count < 1) throw GeneratorError("a chiplet needs at least one PHY");
    if (!(width > 0.0 && height > 0.0)) throw GeneratorError("chiplet dimensions must be positive");
    const int n = phy_count;
    std::vector<Point> out;
    switch (style) {
        case PhyPlacementStyle::perimeter_even: {
            const double perimeter = 2.0 * (width + height);
            for (int i = 0; i < n; ++i) out.push_back(perimeter_point((i + 0.5) * perimeter / n, width, height));
            break;
        }
        case PhyPlacementStyle::corners: {
            if (n > 4) throw GeneratorError("corners style supports at most 4 PHYs, got " + std::to_string(n));
            const Point c[] = {{0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}};
            out.assign(c, c + n);
            break;
        }
        case PhyPlacementStyle::edge_centers: {
            if (n > 4) throw GeneratorError("edge_centers style supports at most 4 PHYs, got " + std::to_string(n));
            const Point c[] = {{width / 2, 0.0}, {width, height / 2}, {width / 2, height}, {0.0, height / 2}};
            out.assign(c, c + n);
            break;
        }
        case PhyPlacementStyle::row_banks: {
            const int bottom = (n + 1) / 2;
            const int top = n / 2;
            for (int i = 0; i < bottom; ++i) out.push_back({(i + 0.5) * width / bottom, 0.0});
            for (int i = 0; i < top; ++i) out.push_back({(i + 0.5) * width / top, height});
            break;
        }
    }
    return out;
}

ChipletDef generate_chiplet(const std::string& name, const ChipletParams& params, int phy_count,
                            PhyPlacementStyle style) {
    if (phy_count < 1) throw GeneratorError("a chiplet needs at least one PHY");
    const double area = params.base_area_mm2 + phy_count * params.phy_area_overhead_mm2;
    if (!(area > 0.0)) throw GeneratorError("chiplet area must be positive");
    ChipletDef c;
    c.name = name;
    c.kind = params.kind;
    c.width_mm = c.height_mm = std::sqrt(area);
    c.internal_latency_cycles = params.internal_latency_cycles;
    c.phy_latency_cycles = params.phy_latency_cycles;
    c.power_w = params.base_power_w + phy_count * params.phy_power_overhead_w;
    c.bump_pitch_mm = params.bump_pitch_mm;
    for (const Point& p : phy_layout(style, phy_count, c.width_mm, c.height_mm))
        c.phys.push_back({p, params.bump_budget / phy_count});
    return c;
}

Placement generate_placement(PlacementKind kind, int rows, int cols, const std::vector<std::string>& names,
                             double width, double height, double spacing_mm) {
    if (rows < 1 || cols < 1) throw GeneratorError("grid dimensions must be positive");
    if (static_cast<int>(names.size()) != rows * cols)
        throw GeneratorError("placement needs " + std::to_string(rows * cols) + " chiplet names, got " +
                             std::to_string(names.size()));
    if (spacing_mm < 0.0) throw GeneratorError("spacing must be non-negative");
    const double px = width + spacing_mm;
    const double py = height + spacing_mm;
    Placement p;
    for (int r = 0; r < rows; ++r) {
        const double shift = (kind == PlacementKind::hex && r % 2 == 1) ? px / 2 : 0.0;
        for (int c = 0; c < cols; ++c) p.instances.push_back({names[r * cols + c], {c * px + shift, r * py}, Rotation::deg0});
    }
    return p;
}

Topology bind_phys(const std::vector<NodePair>& links, const Placement& placement,
                   const std::vector<ChipletDef>& library) {
    const int n = placement.chiplet_count();
    std::vector<const ChipletDef*> defs(n);
    std::vector<std::vector<Point>> phys(n);
    std::vector<Point> centers(n);
    std::vector<std::vector<char>> used(n);
    for (int i = 0; i < n; ++i) {
        const auto& inst = placement.instances[i];
        auto it = std::find_if(library.begin(), library.end(),
                               [&](const ChipletDef& c) { return c.name == inst.chiplet_name; });
        if (it == library.end()) throw GeneratorError("unknown chiplet '" + inst.chiplet_name + "'");
        defs[i] = &*it;
        Rect r = footprint(*it, inst);
        centers[i] = {(r.x0 + r.x1) / 2, (r.y0 + r.y1) / 2};
        for (int k = 0; k < static_cast<int>(it->phys.size()); ++k) phys[i].push_back(phy_position(*it, inst, k));
        used[i].assign(it->phys.size(), 0);
    }

    auto closest_free = [&](int node, Point target) {
        int best = -1;
        double best_d = 0.0;
        for (int k = 0; k < static_cast<int>(phys[node].size()); ++k) {
            if (used[node][k]) continue;
            double d = std::hypot(phys[node][k].x - target.x, phys[node][k].y - target.y);
            if (best < 0 || d < best_d - 1e-9) {
                best = k;
                best_d = d;
            }
        }
        if (best < 0) throw GeneratorError("chiplet instance " + std::to_string(node) + " has no free PHY");
        used[node][best] = 1;
        return best;
    };

    Topology t;
    for (const auto& [u, v] : links) {
        if (u < 0 || v < 0 || u >= n || v >= n) throw GeneratorError("link endpoint out of range");
        int pu = closest_free(u, centers[v]);
        int pv = closest_free(v, phys[u][pu]);
        t.links.push_back({{EndpointKind::chiplet, u, pu}, {EndpointKind::chiplet, v, pv}});
    }
    return t;
}

PhyPlacementStyle auto_phy_style(TopologyKind kind, int degree) {
    const bool mesh_like = kind == TopologyKind::mesh || kind == TopologyKind::torus ||
                           kind == TopologyKind::folded_torus || kind == TopologyKind::shg;
    return (mesh_like && degree <= 4) ? PhyPlacementStyle::corners : PhyPlacementStyle::perimeter_even;
}

Packaging reference_packaging() {
    Packaging p;
    p.has_active_interposer = false;
    p.router_latency_cycles = 0.0;
    p.link_routing = LinkRouting::manhattan;
    p.link_latency = PerMmLatency{0.25};
    p.link_power_per_mm_w = 0.01;
    p.interposer_power_w = 0.0;
    p.packaging_cost = 100.0;
    p.non_data_wires = 2;
    return p;
}

TechNode reference_technology() {
    TechNode t;
    t.name = "n7";
    t.wafer_diameter_mm = 300.0;
    t.wafer_cost = 10000.0;
    t.defect_density_per_mm2 = 0.001;
    t.clustering_parameter = 3.0;
    return t;
}

DesignBundle build_design(const DesignPoint& point) {
    if (point.rows * point.cols < 2) throw GeneratorError("a design needs at least two chiplets");
    std::vector<NodePair> links = point.topology == TopologyKind::shg
                                      ? generate_shg(point.rows, point.cols, point.shg_bits)
                                      : generate_topology(point.topology, point.rows, point.cols);
    const int n = point.rows * point.cols;
    std::vector<int> degree(n, 0);
    for (auto [a, b] : links) {
        ++degree[a];
        ++degree[b];
    }

    DesignBundle b;
    std::map<int, int> by_degree;  // degree -> library index
    for (int d : std::set<int>(degree.begin(), degree.end())) {
        if (d == 0) throw GeneratorError("topology leaves a chiplet without links");
        PhyPlacementStyle style = point.phy_style ? *point.phy_style : auto_phy_style(point.topology, d);
        by_degree[d] = static_cast<int>(b.chiplets.size());
        b.chiplets.push_back(generate_chiplet("chiplet_p" + std::to_string(d), point.chiplet, d, style));
    }
    double cell = 0.0;
    for (const auto& c : b.chiplets) cell = std::max(cell, c.width_mm);

    std::vector<std::string> names(n);
    for (int i = 0; i < n; ++i) names[i] = b.chiplets[by_degree[degree[i]]].name;
    const PlacementKind pk = point.topology == TopologyKind::hexamesh ? PlacementKind::hex : PlacementKind::grid;
    b.placement = generate_placement(pk, point.rows, point.cols, names, cell, cell, point.spacing_mm);
    b.topology = bind_phys(links, b.placement, b.chiplets);
    b.packaging = point.packaging;
    b.routing_table = generate_routing_table(links, n, n, point.routing, point.seed);
    b.traffic = generate_traffic(point.traffic, point.rows, point.cols, point.seed, point.traffic_options);

    TechNode tech = point.technology ? *point.technology : reference_technology();
    b.technology.nodes.push_back(tech);
    for (const auto& c : b.chiplets) b.technology.assignment[c.name] = tech.name;
    return b;
}

}  // namespace chipnet::netgen
