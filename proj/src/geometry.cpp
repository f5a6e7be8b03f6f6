#include "chipnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chipnet/kernels.hpp"

namespace chipnet {

Point rotate_in_footprint(Point rel, double width, double height, Rotation rotation) {
    switch (rotation) {
        case Rotation::deg0: return rel;
        case Rotation::deg90: return {height - rel.y, rel.x};
        case Rotation::deg180: return {width - rel.x, height - rel.y};
        case Rotation::deg270: return {rel.y, width - rel.x};
    }
    return rel;
}

Extent rotated_extent(const ChipletDef& chiplet, Rotation rotation) {
    if (rotation == Rotation::deg90 || rotation == Rotation::deg270) return {chiplet.height_mm, chiplet.width_mm};
    return {chiplet.width_mm, chiplet.height_mm};
}

Rect footprint(const ChipletDef& chiplet, const PlacedChiplet& instance) {
    Extent e = rotated_extent(chiplet, instance.rotation);
    return {instance.position.x, instance.position.y, instance.position.x + e.width_mm,
            instance.position.y + e.height_mm};
}

Point phy_position(const ChipletDef& chiplet, const PlacedChiplet& instance, int phy_index) {
    if (phy_index < 0 || phy_index >= static_cast<int>(chiplet.phys.size()))
        throw ModelError("chiplet '" + chiplet.name + "' has no PHY " + std::to_string(phy_index));
    Point rel = rotate_in_footprint(chiplet.phys[phy_index].position, chiplet.width_mm, chiplet.height_mm,
                                    instance.rotation);
    return {instance.position.x + rel.x, instance.position.y + rel.y};
}

double link_length(Point a, Point b, LinkRouting rule) {
    double dx = a.x - b.x;
    double dy = a.y - b.y;
    return rule == LinkRouting::manhattan ? std::fabs(dx) + std::fabs(dy) : std::sqrt(dx * dx + dy * dy);
}

bool interiors_overlap(const Rect& a, const Rect& b) {
    constexpr double tol = 1e-9;  // mm; absorbs rounding in abutting placements
    return a.x0 < b.x1 - tol && b.x0 < a.x1 - tol && a.y0 < b.y1 - tol && b.y0 < a.y1 - tol;
}

Rect bounding_box(const Placement& placement, const std::vector<ChipletDef>& library) {
    if (placement.instances.empty()) throw ModelError("enclosing rectangle of an empty placement");
    constexpr double inf = std::numeric_limits<double>::infinity();
    Rect box{inf, inf, -inf, -inf};
    for (const auto& inst : placement.instances) {
        auto it = std::find_if(library.begin(), library.end(),
                               [&](const ChipletDef& c) { return c.name == inst.chiplet_name; });
        if (it == library.end()) throw ModelError("unknown chiplet '" + inst.chiplet_name + "'");
        Rect r = footprint(*it, inst);
        box.x0 = std::min(box.x0, r.x0);
        box.y0 = std::min(box.y0, r.y0);
        box.x1 = std::max(box.x1, r.x1);
        box.y1 = std::max(box.y1, r.y1);
    }
    return box;
}

Extent enclosing_rectangle(const Placement& placement, const std::vector<ChipletDef>& library) {
    Rect box = bounding_box(placement, library);
    return {box.width(), box.height()};
}

Point endpoint_position(const DesignBundle& bundle, const Endpoint& endpoint) {
    if (endpoint.kind == EndpointKind::interposer_router) {
        if (endpoint.index < 0 || endpoint.index >= static_cast<int>(bundle.placement.interposer_routers.size()))
            throw ModelError("interposer router " + std::to_string(endpoint.index) + " out of range");
        return bundle.placement.interposer_routers[endpoint.index].position;
    }
    return phy_position(bundle.chiplet_of(endpoint.index), bundle.placement.instances[endpoint.index],
                        endpoint.phy_index);
}

std::vector<double> link_lengths(const DesignBundle& bundle) {
    const auto& links = bundle.topology.links;
    std::size_t n = links.size();
    std::vector<double> ax(n), ay(n), bx(n), by(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Point a = endpoint_position(bundle, links[i].a);
        Point b = endpoint_position(bundle, links[i].b);
        ax[i] = a.x;
        ay[i] = a.y;
        bx[i] = b.x;
        by[i] = b.y;
    }
    kernels::link_lengths(ax, ay, bx, by, bundle.packaging.link_routing, out);
    return out;
}

}  // namespace chipnet
