#pragma once

// Declarative input model: the nine input kinds that make up one design point.
//
// Node numbering used by routing tables, traffic and traces: placed chiplet
// instances first (placement declaration order), interposer routers after.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace chipnet {

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

struct PhyDef {
    Point position;  // relative to the unrotated lower-left corner
    double area_fraction = 0.0;
    bool operator==(const PhyDef&) const = default;
};

struct ChipletDef {
    std::string name;
    std::string kind = "compute";
    double width_mm = 0.0;
    double height_mm = 0.0;
    double internal_latency_cycles = 0.0;
    double phy_latency_cycles = 0.0;
    double power_w = 0.0;
    double bump_pitch_mm = 0.0;
    std::vector<PhyDef> phys;

    double area_mm2() const { return width_mm * height_mm; }
    bool operator==(const ChipletDef&) const = default;
};

enum class Rotation : int { deg0 = 0, deg90 = 90, deg180 = 180, deg270 = 270 };

struct PlacedChiplet {
    std::string chiplet_name;
    Point position;
    Rotation rotation = Rotation::deg0;
    bool operator==(const PlacedChiplet&) const = default;
};

struct InterposerRouter {
    Point position;
    bool operator==(const InterposerRouter&) const = default;
};

struct Placement {
    std::vector<PlacedChiplet> instances;
    std::vector<InterposerRouter> interposer_routers;

    int chiplet_count() const { return static_cast<int>(instances.size()); }
    int node_count() const { return static_cast<int>(instances.size() + interposer_routers.size()); }
    bool operator==(const Placement&) const = default;
};

enum class EndpointKind { chiplet, interposer_router };

struct Endpoint {
    EndpointKind kind = EndpointKind::chiplet;
    int index = 0;
    int phy_index = 0;  // chiplet endpoints only

    bool operator==(const Endpoint&) const = default;
};

struct Link {
    Endpoint a;
    Endpoint b;
    bool operator==(const Link&) const = default;
};

struct Topology {
    std::vector<Link> links;
    bool operator==(const Topology&) const = default;
};

enum class LinkRouting { manhattan, direct };

struct ConstantLatency {
    double cycles = 0.0;
    bool operator==(const ConstantLatency&) const = default;
};
struct PerMmLatency {
    double cycles_per_mm = 0.0;
    bool operator==(const PerMmLatency&) const = default;
};
using LinkLatency = std::variant<ConstantLatency, PerMmLatency>;

struct Packaging {
    bool has_active_interposer = false;
    double router_latency_cycles = 0.0;
    LinkRouting link_routing = LinkRouting::manhattan;
    LinkLatency link_latency = ConstantLatency{};
    double link_power_per_mm_w = 0.0;
    double interposer_power_w = 0.0;
    double packaging_cost = 0.0;
    int non_data_wires = 0;
    bool operator==(const Packaging&) const = default;
};

// next_hop[node] maps destination chiplet index -> outgoing link index.
struct RoutingTable {
    std::vector<std::map<int, int>> next_hop;
    bool operator==(const RoutingTable&) const = default;
};

struct TrafficEntry {
    int src = 0;
    int dst = 0;
    double amount = 0.0;
    bool operator==(const TrafficEntry&) const = default;
};

struct Traffic {
    std::vector<TrafficEntry> entries;

    double total() const {
        double sum = 0.0;
        for (const auto& e : entries) sum += e.amount;
        return sum;
    }
    bool operator==(const Traffic&) const = default;
};

struct TraceMessage {
    int64_t id = 0;
    int64_t earliest_injection_cycle = 0;
    int src = 0;
    int dst = 0;
    int size_flits = 1;
    std::vector<int64_t> deps;
    bool operator==(const TraceMessage&) const = default;
};

struct Trace {
    std::vector<TraceMessage> messages;
    bool operator==(const Trace&) const = default;
};

struct TechNode {
    std::string name;
    double wafer_diameter_mm = 300.0;
    double wafer_cost = 0.0;
    double defect_density_per_mm2 = 0.0;
    double clustering_parameter = 1.0;
    bool operator==(const TechNode&) const = default;
};

struct Technology {
    std::vector<TechNode> nodes;
    std::map<std::string, std::string> assignment;  // chiplet name -> tech node name

    const TechNode* node_for(const std::string& chiplet_name) const;
    bool operator==(const Technology&) const = default;
};

struct SimParams {
    int vcs_per_port = 4;
    int buffer_flits_per_vc = 16;
    int packet_size_flits = 1;
    int64_t warmup_cycles = 1000;
    int64_t measurement_cycles = 0;  // 0: 1000 + 100 * |V|
    int64_t drain_cycle_limit = 20000;
    double latency_saturation_factor = 10.0;
    uint64_t seed = 1;
    bool operator==(const SimParams&) const = default;
};

struct DesignBundle {
    std::vector<ChipletDef> chiplets;
    Placement placement;
    Topology topology;
    Packaging packaging;
    RoutingTable routing_table;
    Traffic traffic;
    std::optional<Trace> trace;
    Technology technology;
    std::optional<SimParams> simulator;

    const ChipletDef* find_chiplet(const std::string& name) const;
    const ChipletDef& chiplet_of(int instance) const;
    bool operator==(const DesignBundle&) const = default;
};

// Raised by any operation whose input violates its precondition.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const char* to_string(EndpointKind kind);
const char* to_string(LinkRouting routing);

}  // namespace chipnet
