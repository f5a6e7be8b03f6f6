#include "chipnet/render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <sstream>

#include "chipnet/dse.hpp"
#include "chipnet/geometry.hpp"

namespace chipnet {

namespace {

constexpr double kScale = 10.0;   // px per mm
constexpr double kMargin = 2.0;   // mm around the interposer

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const DesignBundle& bundle) {
    const Rect box = bounding_box(bundle.placement, bundle.chiplets);
    const double w = (box.width() + 2 * kMargin) * kScale;
    const double h = (box.height() + 2 * kMargin) * kScale;
    auto X = [&](double x) { return (x - box.x0 + kMargin) * kScale; };
    auto Y = [&](double y) { return (box.y1 - y + kMargin) * kScale; };
    auto pt = [&](Point p) { return num(X(p.x)) + "," + num(Y(p.y)); };

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s << "<!-- scale 10 px/mm; origin lower-left of the interposer; y flipped for screen coordinates -->\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
    s << "<polygon class=\"interposer\" points=\"" << pt({box.x0, box.y0}) << ' ' << pt({box.x1, box.y0}) << ' '
      << pt({box.x1, box.y1}) << ' ' << pt({box.x0, box.y1})
      << "\" fill=\"#f4f1e8\" stroke=\"#555\" stroke-width=\"1\"/>\n";

    for (int i = 0; i < bundle.placement.chiplet_count(); ++i) {
        const auto& inst = bundle.placement.instances[i];
        const ChipletDef& def = bundle.chiplet_of(i);
        Rect r = footprint(def, inst);
        s << "<rect class=\"chiplet\" data-index=\"" << i << "\" x=\"" << num(X(r.x0)) << "\" y=\"" << num(Y(r.y1))
          << "\" width=\"" << num(r.width() * kScale) << "\" height=\"" << num(r.height() * kScale)
          << "\" fill=\"#cfe0f3\" stroke=\"#234\" stroke-width=\"1\"/>\n";
        s << "<text x=\"" << num(X((r.x0 + r.x1) / 2)) << "\" y=\"" << num(Y((r.y0 + r.y1) / 2))
          << "\" font-size=\"10\" text-anchor=\"middle\" dominant-baseline=\"middle\">" << xml_escape(inst.chiplet_name)
          << " #" << i << "</text>\n";
    }
    for (int i = 0; i < bundle.placement.chiplet_count(); ++i) {
        const ChipletDef& def = bundle.chiplet_of(i);
        for (int k = 0; k < static_cast<int>(def.phys.size()); ++k) {
            Point p = phy_position(def, bundle.placement.instances[i], k);
            s << "<circle class=\"phy\" cx=\"" << num(X(p.x)) << "\" cy=\"" << num(Y(p.y))
              << "\" r=\"3\" fill=\"#c33\"/>\n";
        }
    }
    for (const auto& router : bundle.placement.interposer_routers) {
        s << "<circle class=\"router\" cx=\"" << num(X(router.position.x)) << "\" cy=\"" << num(Y(router.position.y))
          << "\" r=\"6\" fill=\"#396\"/>\n";
    }
    for (std::size_t i = 0; i < bundle.topology.links.size(); ++i) {
        const Link& l = bundle.topology.links[i];
        Point a = endpoint_position(bundle, l.a);
        Point b = endpoint_position(bundle, l.b);
        s << "<polyline class=\"link\" data-index=\"" << i << "\" points=\"" << pt(a) << ' ';
        if (bundle.packaging.link_routing == LinkRouting::manhattan) s << pt({b.x, a.y}) << ' ';
        s << pt(b) << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"2\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

PlotKind parse_plot_kind(const std::string& s) {
    if (s == "latency_vs_load") return PlotKind::latency_vs_load;
    if (s == "pareto_scatter") return PlotKind::pareto_scatter;
    throw ModelError("unknown plot kind '" + s + "' (expected latency_vs_load or pareto_scatter)");
}

csv::Table plot_data(const csv::Table& in, PlotKind kind) {
    auto need = [&](const std::string& c) {
        int i = in.column(c);
        if (i < 0) throw ModelError("missing required column '" + c + "'");
        return i;
    };
    auto to_num = [](const std::string& s) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            return used == s.size() ? v : std::nan("");
        } catch (const std::exception&) {
            return std::nan("");
        }
    };
    csv::Table out;
    if (kind == PlotKind::latency_vs_load) {
        int rate = need("rate"), lat = need("avg_latency_cycles");
        int series = in.column("design");
        struct R {
            std::string series;
            double x, y;
        };
        std::vector<R> rows;
        for (const auto& f : in.rows) {
            double x = to_num(f[rate]), y = to_num(f[lat]);
            if (std::isnan(x) || std::isnan(y)) continue;
            rows.push_back({series >= 0 ? f[series] : "", x, y});
        }
        if (rows.empty()) throw ModelError("no rows");
        std::stable_sort(rows.begin(), rows.end(),
                         [](const R& a, const R& b) { return a.series != b.series ? a.series < b.series : a.x < b.x; });
        out.header = {"series", "injection_rate", "avg_latency_cycles"};
        for (const auto& r : rows) out.rows.push_back({r.series, fmt(r.x), fmt(r.y)});
        return out;
    }

    std::vector<dse::ResultRow> rows;
    for (const auto& c : {"proxy_throughput_rate", "proxy_latency_cycles", "area_overhead", "status", "topology"})
        need(c);
    for (std::size_t i = 0; i < in.rows.size(); ++i) {
        dse::ResultRow r = dse::row_from_fields(in, i);
        if (r.ok()) rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ModelError("no rows");
    std::vector<std::size_t> front = dse::pareto_front(rows, std::numeric_limits<double>::infinity());
    std::vector<char> on_front(rows.size(), 0);
    for (std::size_t i : front) on_front[i] = 1;
    out.header = {"series", "index", "shg_bits", "throughput_rate", "latency_cycles", "area_overhead", "on_front"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out.rows.push_back({r.topology + " " + std::to_string(r.rows) + "x" + std::to_string(r.cols),
                            std::to_string(r.index), r.shg_bits, fmt(r.proxy_throughput_rate),
                            fmt(r.proxy_latency_cycles), fmt(r.area_overhead), on_front[i] ? "1" : "0"});
    }
    return out;
}

}  // namespace chipnet
