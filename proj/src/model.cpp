#include "chipnet/model.hpp"

namespace chipnet {

const TechNode* Technology::node_for(const std::string& chiplet_name) const {
    auto it = assignment.find(chiplet_name);
    if (it == assignment.end()) return nullptr;
    for (const auto& n : nodes) {
        if (n.name == it->second) return &n;
    }
    return nullptr;
}

const ChipletDef* DesignBundle::find_chiplet(const std::string& name) const {
    for (const auto& c : chiplets) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

const ChipletDef& DesignBundle::chiplet_of(int instance) const {
    if (instance < 0 || instance >= placement.chiplet_count())
        throw ModelError("chiplet instance " + std::to_string(instance) + " out of range");
    const ChipletDef* def = find_chiplet(placement.instances[instance].chiplet_name);
    if (!def) throw ModelError("unknown chiplet '" + placement.instances[instance].chiplet_name + "'");
    return *def;
}

const char* to_string(EndpointKind kind) {
    return kind == EndpointKind::chiplet ? "chiplet" : "interposer_router";
}

const char* to_string(LinkRouting routing) { return routing == LinkRouting::manhattan ? "manhattan" : "direct"; }

}  // namespace chipnet
