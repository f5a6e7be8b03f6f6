#pragma once

// Absolute PHY positions, link lengths and the interposer bounding box.
//
// Rotation keeps the footprint anchored at the placed lower-left corner: the
// chiplet is rotated about its own rectangle, then translated. A 90 degree
// turn maps relative (x, y) on a w x h chiplet to (h - y, x) on h x w.

#include <vector>

#include "chipnet/model.hpp"

namespace chipnet {

struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
};

struct Extent {
    double width_mm = 0.0;
    double height_mm = 0.0;
};

// Relative position of a point after rotating a w x h footprint onto itself.
Point rotate_in_footprint(Point rel, double width, double height, Rotation rotation);

// Width/height after rotation (swapped for 90 and 270).
Extent rotated_extent(const ChipletDef& chiplet, Rotation rotation);

Rect footprint(const ChipletDef& chiplet, const PlacedChiplet& instance);

Point phy_position(const ChipletDef& chiplet, const PlacedChiplet& instance, int phy_index);

double link_length(Point a, Point b, LinkRouting rule);

// True when the open interiors intersect by more than 1e-9 mm; shared edges are allowed.
bool interiors_overlap(const Rect& a, const Rect& b);

Rect bounding_box(const Placement& placement, const std::vector<ChipletDef>& library);
Extent enclosing_rectangle(const Placement& placement, const std::vector<ChipletDef>& library);

Point endpoint_position(const DesignBundle& bundle, const Endpoint& endpoint);

// Length of every topology link under the packaging's routing rule, in link order.
std::vector<double> link_lengths(const DesignBundle& bundle);

}  // namespace chipnet
