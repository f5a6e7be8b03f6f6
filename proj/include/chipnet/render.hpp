#pragma once

// Static visualization: SVG floorplans and plot-ready CSV reshaping.

#include <string>

#include "chipnet/csv.hpp"
#include "chipnet/model.hpp"

namespace chipnet {

// 10 px/mm, origin at the lower-left of the interposer, y pointing up.
// Chiplets are <rect>, PHYs and routers <circle>, links <polyline> following
// the packaging's link-routing rule, the interposer outline a <polygon>.
std::string render_svg(const DesignBundle& bundle);

enum class PlotKind { latency_vs_load, pareto_scatter };

PlotKind parse_plot_kind(const std::string& s);

// latency_vs_load needs columns rate and avg_latency_cycles (optional: design);
// pareto_scatter needs a sweep results table. Throws ModelError on missing
// columns or when no usable rows remain ("no rows").
csv::Table plot_data(const csv::Table& input, PlotKind kind);

}  // namespace chipnet
