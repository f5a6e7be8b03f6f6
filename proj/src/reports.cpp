#include "chipnet/reports.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "chipnet/geometry.hpp"

namespace chipnet {

AreaReport area_report(const DesignBundle& bundle) {
    AreaReport r;
    for (int i = 0; i < bundle.placement.chiplet_count(); ++i) r.chiplet_area_sum_mm2 += bundle.chiplet_of(i).area_mm2();
    Extent e = enclosing_rectangle(bundle.placement, bundle.chiplets);
    r.interposer_area_mm2 = e.width_mm * e.height_mm;
    return r;
}

double power_report(const DesignBundle& bundle) {
    double total = 0.0;
    for (int i = 0; i < bundle.placement.chiplet_count(); ++i) total += bundle.chiplet_of(i).power_w;
    total += bundle.packaging.interposer_power_w;
    if (bundle.packaging.link_power_per_mm_w != 0.0) {
        for (double len : link_lengths(bundle)) total += len * bundle.packaging.link_power_per_mm_w;
    }
    return total;
}

double die_yield(double area_mm2, const TechNode& tech) {
    if (!(area_mm2 > 0)) throw ModelError("yield needs a positive die area");
    return std::pow(1.0 + area_mm2 * tech.defect_density_per_mm2 / tech.clustering_parameter,
                    -tech.clustering_parameter);
}

int64_t dies_per_wafer(double area_mm2, double wafer_diameter_mm) {
    if (!(area_mm2 > 0)) throw ModelError("dies per wafer needs a positive die area");
    double r = wafer_diameter_mm / 2.0;
    double estimate = std::numbers::pi * r * r / area_mm2 - std::numbers::pi * wafer_diameter_mm / std::sqrt(2.0 * area_mm2);
    return static_cast<int64_t>(std::floor(estimate));
}

CostBreakdown cost_report(const DesignBundle& bundle) {
    std::map<std::string, int> counts;
    for (const auto& inst : bundle.placement.instances) ++counts[inst.chiplet_name];

    CostBreakdown out;
    out.packaging_cost = bundle.packaging.packaging_cost;
    out.total_cost = out.packaging_cost;
    for (const auto& [name, n] : counts) {
        const ChipletDef* def = bundle.find_chiplet(name);
        if (!def) throw ModelError("unknown chiplet '" + name + "'");
        const TechNode* tech = bundle.technology.node_for(name);
        if (!tech) throw ModelError("chiplet '" + name + "' has no technology node");
        CostLine line;
        line.chiplet = name;
        line.area_mm2 = def->area_mm2();
        line.yield = die_yield(line.area_mm2, *tech);
        line.dies_per_wafer = dies_per_wafer(line.area_mm2, tech->wafer_diameter_mm);
        if (line.dies_per_wafer <= 0)
            throw ModelError("chiplet '" + name + "' does not fit on a " + std::to_string(tech->wafer_diameter_mm) +
                             " mm wafer");
        line.die_cost = tech->wafer_cost / (static_cast<double>(line.dies_per_wafer) * line.yield);
        line.instances = n;
        out.total_cost += line.die_cost * n;
        out.per_chiplet.push_back(line);
    }
    return out;
}

}  // namespace chipnet
