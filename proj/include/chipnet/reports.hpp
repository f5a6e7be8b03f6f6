#pragma once

// Area, power and manufacturing-cost reports.
//
// Yield uses the negative-binomial model y = (1 + A*D0/alpha)^-alpha. Dies per
// wafer uses the circular-wafer estimate with an edge-loss term:
// floor(pi*(d/2)^2/A - pi*d/sqrt(2A)).

#include <cstdint>
#include <string>
#include <vector>

#include "chipnet/model.hpp"

namespace chipnet {

struct AreaReport {
    double chiplet_area_sum_mm2 = 0.0;
    double interposer_area_mm2 = 0.0;
};

struct CostLine {
    std::string chiplet;
    double area_mm2 = 0.0;
    double yield = 0.0;
    int64_t dies_per_wafer = 0;
    double die_cost = 0.0;
    int instances = 0;
};

struct CostBreakdown {
    std::vector<CostLine> per_chiplet;  // one line per chiplet design in use
    double packaging_cost = 0.0;
    double total_cost = 0.0;
};

AreaReport area_report(const DesignBundle& bundle);

// Chiplet power + interposer power + length-proportional link power.
double power_report(const DesignBundle& bundle);

double die_yield(double area_mm2, const TechNode& tech);
int64_t dies_per_wafer(double area_mm2, double wafer_diameter_mm);

CostBreakdown cost_report(const DesignBundle& bundle);

}  // namespace chipnet
