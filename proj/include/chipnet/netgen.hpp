#pragma once

// Input generators for automated exploration: chiplets with PHY layouts,
// grid/hex placements, ICI topologies, deadlock-free routing tables and
// synthetic traffic. Everything is a pure function of its parameters and seed.
//
// Grid node ids are row-major: node (r, c) = r * cols + c.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chipnet/model.hpp"

namespace chipnet::netgen {

enum class PhyPlacementStyle { perimeter_even, corners, edge_centers, row_banks };
enum class PlacementKind { grid, hex };
enum class TopologyKind { mesh, torus, folded_torus, flattened_butterfly, hypercube, hexamesh, shg };
enum class RoutingAlgorithm { lowest_id, turn_random };
enum class TrafficPattern { uniform, transpose, permutation, hotspot };

const char* to_string(PhyPlacementStyle v);
const char* to_string(PlacementKind v);
const char* to_string(TopologyKind v);
const char* to_string(RoutingAlgorithm v);
const char* to_string(TrafficPattern v);

PhyPlacementStyle parse_phy_style(const std::string& s);
TopologyKind parse_topology(const std::string& s);
RoutingAlgorithm parse_routing(const std::string& s);
TrafficPattern parse_traffic(const std::string& s);

class GeneratorError : public ModelError {
public:
    using ModelError::ModelError;
};

struct ChipletParams {
    double base_area_mm2 = 74.0;
    double base_power_w = 1.0;
    double phy_area_overhead_mm2 = 0.85;
    double phy_power_overhead_w = 0.0;
    double bump_pitch_mm = 0.04;
    double internal_latency_cycles = 3.0;
    double phy_latency_cycles = 12.0;
    double bump_budget = 1.0;  // total area fraction shared by all PHYs
    std::string kind = "compute";
};

// PHY positions on a w x h footprint, all on or inside it and pairwise distinct.
std::vector<Point> phy_layout(PhyPlacementStyle style, int phy_count, double width, double height);

// Square chiplet of side sqrt(base + n * overhead).
ChipletDef generate_chiplet(const std::string& name, const ChipletParams& params, int phy_count,
                            PhyPlacementStyle style);

Placement generate_placement(PlacementKind kind, int rows, int cols, const std::vector<std::string>& names,
                             double width, double height, double spacing_mm);

// An undirected link between two node ids, stored with first < second.
using NodePair = std::pair<int, int>;

std::vector<NodePair> generate_topology(TopologyKind kind, int rows, int cols);

// bits: first rows-2 entries flag interior rows 1..rows-2, the rest flag
// interior columns 1..cols-2. A flagged line becomes all-to-all; the boundary
// lines follow only when every bit is set.
std::vector<NodePair> generate_shg(int rows, int cols, const std::vector<bool>& bits);

std::vector<bool> shg_bits_from_index(uint64_t index, int rows, int cols);
std::string shg_bits_to_string(const std::vector<bool>& bits);

// Hop distance from every node to `dst` (-1 if unreachable).
std::vector<int> bfs_distances(int node_count, const std::vector<NodePair>& links, int dst);

// Destinations are nodes 0..chiplet_count-1; table values index `links`.
RoutingTable generate_routing_table(const std::vector<NodePair>& links, int node_count, int chiplet_count,
                                    RoutingAlgorithm algorithm, uint64_t seed);

// First cycle in the channel dependency graph induced by the table's routes,
// as a list of directed channels (from, to); empty when the graph is acyclic.
std::vector<NodePair> dependency_cycle(const RoutingTable& table, const std::vector<NodePair>& links,
                                       int node_count, int chiplet_count);

struct TrafficOptions {
    int hotspot_count = 4;
    double hotspot_share = 0.5;
};

Traffic generate_traffic(TrafficPattern pattern, int rows, int cols, uint64_t seed,
                         const TrafficOptions& options = {});

// Binds links in order: the first chiplet takes its free PHY closest to the
// second chiplet's center, the second takes its free PHY closest to that one.
// Ties go to the lower PHY index.
Topology bind_phys(const std::vector<NodePair>& links, const Placement& placement,
                   const std::vector<ChipletDef>& library);

// Style used for a chiplet of the given degree in a topology of `kind`.
PhyPlacementStyle auto_phy_style(TopologyKind kind, int degree);

// Packaging and technology matching the reference evaluation setup:
// per-mm link latency of 0.25 cycles/mm over manhattan-routed links.
Packaging reference_packaging();
TechNode reference_technology();

struct DesignPoint {
    TopologyKind topology = TopologyKind::mesh;
    int rows = 3;
    int cols = 3;
    std::vector<bool> shg_bits;  // only for TopologyKind::shg
    TrafficPattern traffic = TrafficPattern::uniform;
    RoutingAlgorithm routing = RoutingAlgorithm::lowest_id;
    uint64_t seed = 1;
    ChipletParams chiplet;
    Packaging packaging = reference_packaging();
    std::optional<TechNode> technology;
    double spacing_mm = 0.0;
    std::optional<PhyPlacementStyle> phy_style;  // overrides the automatic choice
    TrafficOptions traffic_options;
};

// Materializes a full, self-consistent bundle. Chiplets get one PHY per
// incident link, so the library holds one chiplet design per distinct degree.
DesignBundle build_design(const DesignPoint& point);

}  // namespace chipnet::netgen
