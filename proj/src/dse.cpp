#include "chipnet/dse.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "chipnet/flitsim.hpp"
#include "chipnet/io.hpp"
#include "chipnet/proxy.hpp"
#include "chipnet/validate.hpp"

namespace chipnet::dse {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) { throw InputError("", where, msg); }

const json& member(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where + "/" + key, "missing required field '" + key + "'");
    return *it;
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known |= it.key() == k;
        if (!known) fail(where + "/" + it.key(), "unknown field '" + it.key() + "'");
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "expected a finite number");
    return d;
}

int64_t integer(const json& v, const std::string& where) {
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<int64_t>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<int64_t>(d);
    }
    fail(where, "expected an integer");
}

std::string string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

const json& nonempty_array(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array");
    if (v.empty()) fail(where, "range must not be empty");
    return v;
}

// Enum parse errors carry the pointer of the offending element.
template <class F>
auto parse_at(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const netgen::GeneratorError& e) {
        fail(where, e.what());
    }
}

template <class Decoder>
auto nested(const json& v, const std::string& where, Decoder decode) -> decltype(decode(v)) {
    try {
        return decode(v);
    } catch (const InputError& e) {
        throw InputError("", where + e.where(), e.message());
    }
}

netgen::ChipletParams chiplet_params_from_json(const json& v, const std::string& where, bool allow_name) {
    if (allow_name) {
        check_keys(v, where,
                   {"name", "base_area_mm2", "base_power_w", "phy_area_overhead_mm2", "phy_power_overhead_w",
                    "bump_pitch_mm", "internal_latency_cycles", "phy_latency_cycles", "bump_budget", "kind"});
    } else {
        check_keys(v, where,
                   {"base_area_mm2", "base_power_w", "phy_area_overhead_mm2", "phy_power_overhead_w", "bump_pitch_mm",
                    "internal_latency_cycles", "phy_latency_cycles", "bump_budget", "kind"});
    }
    netgen::ChipletParams p;
    auto num = [&](const char* key, double& out) {
        if (v.contains(key)) out = number(v.at(key), where + "/" + key);
    };
    num("base_area_mm2", p.base_area_mm2);
    num("base_power_w", p.base_power_w);
    num("phy_area_overhead_mm2", p.phy_area_overhead_mm2);
    num("phy_power_overhead_w", p.phy_power_overhead_w);
    num("bump_pitch_mm", p.bump_pitch_mm);
    num("internal_latency_cycles", p.internal_latency_cycles);
    num("phy_latency_cycles", p.phy_latency_cycles);
    num("bump_budget", p.bump_budget);
    if (v.contains("kind")) p.kind = string(v.at("kind"), where + "/kind");
    if (!(p.base_area_mm2 > 0.0)) fail(where + "/base_area_mm2", "must be positive");
    if (p.phy_area_overhead_mm2 < 0.0) fail(where + "/phy_area_overhead_mm2", "must be non-negative");
    if (!(p.bump_pitch_mm > 0.0)) fail(where + "/bump_pitch_mm", "must be positive");
    if (!(p.bump_budget > 0.0 && p.bump_budget <= 1.0)) fail(where + "/bump_budget", "must be in (0, 1]");
    return p;
}

TechNode tech_node_from_json(const json& v, const std::string& where) {
    check_keys(v, where,
               {"name", "wafer_diameter_mm", "wafer_cost", "defect_density_per_mm2", "clustering_parameter"});
    TechNode t;
    t.name = string(member(v, "name", where), where + "/name");
    t.wafer_diameter_mm = number(member(v, "wafer_diameter_mm", where), where + "/wafer_diameter_mm");
    t.wafer_cost = number(member(v, "wafer_cost", where), where + "/wafer_cost");
    t.defect_density_per_mm2 = number(member(v, "defect_density_per_mm2", where), where + "/defect_density_per_mm2");
    t.clustering_parameter = number(member(v, "clustering_parameter", where), where + "/clustering_parameter");
    return t;
}

std::vector<bool> bits_from_string(const std::string& s, const std::string& where) {
    std::vector<bool> bits;
    for (char c : s) {
        if (c != '0' && c != '1') fail(where, "SHG bits must be a string of 0 and 1");
        bits.push_back(c == '1');
    }
    return bits;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::max(s, 1e-9);
}

}  // namespace

Experiment experiment_from_json(const json& doc) {
    check_keys(doc, "",
               {"topologies", "grid_sizes", "traffic_patterns", "packaging_variants", "chiplet_sets",
                "routing_algorithms", "seeds", "evaluation_mode", "shg_sweep", "shg_bits", "technology", "simulator",
                "hotspot_count", "hotspot_share", "workers", "write_inputs"});
    Experiment e;
    {
        const json& a = nonempty_array(member(doc, "topologies", ""), "/topologies");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string w = "/topologies/" + std::to_string(i);
            std::string s = string(a[i], w);
            e.topologies.push_back(parse_at(w, [&] { return netgen::parse_topology(s); }));
        }
    }
    {
        const json& a = nonempty_array(member(doc, "grid_sizes", ""), "/grid_sizes");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string w = "/grid_sizes/" + std::to_string(i);
            if (!a[i].is_array() || a[i].size() != 2) fail(w, "expected [rows, cols]");
            int64_t r = integer(a[i][0], w + "/0"), c = integer(a[i][1], w + "/1");
            if (r < 1 || c < 1 || r > 64 || c > 64) fail(w, "grid dimensions must be in [1, 64]");
            e.grid_sizes.push_back({static_cast<int>(r), static_cast<int>(c)});
        }
    }
    if (doc.contains("traffic_patterns")) {
        const json& a = nonempty_array(doc.at("traffic_patterns"), "/traffic_patterns");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string w = "/traffic_patterns/" + std::to_string(i);
            std::string s = string(a[i], w);
            e.traffic_patterns.push_back(parse_at(w, [&] { return netgen::parse_traffic(s); }));
        }
    } else {
        e.traffic_patterns = {netgen::TrafficPattern::uniform};
    }
    if (doc.contains("packaging_variants")) {
        const json& a = nonempty_array(doc.at("packaging_variants"), "/packaging_variants");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string w = "/packaging_variants/" + std::to_string(i);
            check_keys(a[i], w, {"name", "packaging"});
            NamedPackaging np;
            np.name = string(member(a[i], "name", w), w + "/name");
            np.packaging = nested(member(a[i], "packaging", w), w + "/packaging",
                                  [](const json& j) { return packaging_from_json(j); });
            e.packaging_variants.push_back(std::move(np));
        }
    } else {
        e.packaging_variants = {{"reference", netgen::reference_packaging()}};
    }
    if (doc.contains("chiplet_sets")) {
        const json& a = nonempty_array(doc.at("chiplet_sets"), "/chiplet_sets");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string w = "/chiplet_sets/" + std::to_string(i);
            NamedChipletParams nc;
            nc.params = chiplet_params_from_json(a[i], w, true);
            nc.name = string(member(a[i], "name", w), w + "/name");
            e.chiplet_sets.push_back(std::move(nc));
        }
    } else {
        e.chiplet_sets = {{"default", netgen::ChipletParams{}}};
    }
    if (doc.contains("routing_algorithms")) {
        const json& a = nonempty_array(doc.at("routing_algorithms"), "/routing_algorithms");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string w = "/routing_algorithms/" + std::to_string(i);
            std::string s = string(a[i], w);
            e.routing_algorithms.push_back(parse_at(w, [&] { return netgen::parse_routing(s); }));
        }
    } else {
        e.routing_algorithms = {netgen::RoutingAlgorithm::lowest_id};
    }
    if (doc.contains("seeds")) {
        const json& a = nonempty_array(doc.at("seeds"), "/seeds");
        for (std::size_t i = 0; i < a.size(); ++i) {
            int64_t s = integer(a[i], "/seeds/" + std::to_string(i));
            if (s < 0) fail("/seeds/" + std::to_string(i), "seeds must be non-negative");
            e.seeds.push_back(static_cast<uint64_t>(s));
        }
    } else {
        e.seeds = {1};
    }
    if (doc.contains("evaluation_mode")) {
        std::string m = string(doc.at("evaluation_mode"), "/evaluation_mode");
        if (m == "proxy_only") {
            e.mode = EvaluationMode::proxy_only;
        } else if (m == "proxy_plus_sim") {
            e.mode = EvaluationMode::proxy_plus_sim;
        } else {
            fail("/evaluation_mode", "expected 'proxy_only' or 'proxy_plus_sim'");
        }
    }
    if (doc.contains("shg_sweep")) {
        if (!doc.at("shg_sweep").is_boolean()) fail("/shg_sweep", "expected a boolean");
        e.shg_sweep = doc.at("shg_sweep").get<bool>();
    }
    if (doc.contains("shg_bits")) {
        const json& a = nonempty_array(doc.at("shg_bits"), "/shg_bits");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string w = "/shg_bits/" + std::to_string(i);
            std::string s = string(a[i], w);
            bits_from_string(s, w);
            e.shg_bits.push_back(s);
        }
    }
    if (doc.contains("technology")) e.technology = tech_node_from_json(doc.at("technology"), "/technology");
    if (doc.contains("simulator"))
        e.simulator = nested(doc.at("simulator"), "/simulator", [](const json& j) { return sim_params_from_json(j); });
    if (doc.contains("hotspot_count"))
        e.traffic_options.hotspot_count = static_cast<int>(integer(doc.at("hotspot_count"), "/hotspot_count"));
    if (doc.contains("hotspot_share")) e.traffic_options.hotspot_share = number(doc.at("hotspot_share"), "/hotspot_share");
    if (doc.contains("workers")) {
        int64_t w = integer(doc.at("workers"), "/workers");
        if (w < 0) fail("/workers", "must be non-negative");
        e.workers = static_cast<int>(w);
    }
    if (doc.contains("write_inputs")) {
        if (!doc.at("write_inputs").is_boolean()) fail("/write_inputs", "expected a boolean");
        e.write_inputs = doc.at("write_inputs").get<bool>();
    }

    const bool has_shg = std::count(e.topologies.begin(), e.topologies.end(), netgen::TopologyKind::shg) > 0;
    if (e.shg_sweep && (e.topologies.size() != 1 || !has_shg))
        fail("/shg_sweep", "an SHG sweep requires topologies to be exactly [\"shg\"]");
    if (e.shg_sweep && !e.shg_bits.empty()) fail("/shg_bits", "shg_bits and shg_sweep are mutually exclusive");
    if (has_shg && !e.shg_sweep && e.shg_bits.empty())
        fail("/topologies", "the shg topology needs shg_bits or shg_sweep");
    if (!has_shg && !e.shg_bits.empty()) fail("/shg_bits", "shg_bits given without the shg topology");
    std::set<std::string> names;
    for (std::size_t i = 0; i < e.packaging_variants.size(); ++i)
        if (!names.insert(e.packaging_variants[i].name).second)
            fail("/packaging_variants/" + std::to_string(i) + "/name", "duplicate name");
    names.clear();
    for (std::size_t i = 0; i < e.chiplet_sets.size(); ++i)
        if (!names.insert(e.chiplet_sets[i].name).second)
            fail("/chiplet_sets/" + std::to_string(i) + "/name", "duplicate name");
    if (e.shg_sweep) {
        for (std::size_t i = 0; i < e.grid_sizes.size(); ++i) {
            auto [r, c] = e.grid_sizes[i];
            if (r < 3 || c < 3 || r + c - 4 > 24)
                fail("/grid_sizes/" + std::to_string(i), "SHG sweeps need 3 <= rows, cols and rows + cols <= 28");
        }
    }
    return e;
}

json to_json(const Experiment& e) {
    json doc;
    for (auto t : e.topologies) doc["topologies"].push_back(netgen::to_string(t));
    for (auto [r, c] : e.grid_sizes) doc["grid_sizes"].push_back({r, c});
    for (auto t : e.traffic_patterns) doc["traffic_patterns"].push_back(netgen::to_string(t));
    for (const auto& p : e.packaging_variants)
        doc["packaging_variants"].push_back({{"name", p.name}, {"packaging", chipnet::to_json(p.packaging)}});
    for (const auto& c : e.chiplet_sets) {
        const auto& p = c.params;
        doc["chiplet_sets"].push_back({{"name", c.name},
                                       {"base_area_mm2", p.base_area_mm2},
                                       {"base_power_w", p.base_power_w},
                                       {"phy_area_overhead_mm2", p.phy_area_overhead_mm2},
                                       {"phy_power_overhead_w", p.phy_power_overhead_w},
                                       {"bump_pitch_mm", p.bump_pitch_mm},
                                       {"internal_latency_cycles", p.internal_latency_cycles},
                                       {"phy_latency_cycles", p.phy_latency_cycles},
                                       {"bump_budget", p.bump_budget},
                                       {"kind", p.kind}});
    }
    for (auto r : e.routing_algorithms) doc["routing_algorithms"].push_back(netgen::to_string(r));
    doc["seeds"] = e.seeds;
    doc["evaluation_mode"] = e.mode == EvaluationMode::proxy_only ? "proxy_only" : "proxy_plus_sim";
    doc["shg_sweep"] = e.shg_sweep;
    if (!e.shg_bits.empty()) doc["shg_bits"] = e.shg_bits;
    if (e.technology) {
        const auto& t = *e.technology;
        doc["technology"] = {{"name", t.name},
                             {"wafer_diameter_mm", t.wafer_diameter_mm},
                             {"wafer_cost", t.wafer_cost},
                             {"defect_density_per_mm2", t.defect_density_per_mm2},
                             {"clustering_parameter", t.clustering_parameter}};
    }
    doc["simulator"] = chipnet::to_json(e.simulator);
    doc["hotspot_count"] = e.traffic_options.hotspot_count;
    doc["hotspot_share"] = e.traffic_options.hotspot_share;
    doc["workers"] = e.workers;
    doc["write_inputs"] = e.write_inputs;
    return doc;
}

netgen::DesignPoint design_point_from_json(const json& doc) {
    check_keys(doc, "",
               {"topology", "rows", "cols", "traffic", "routing", "seed", "shg_bits", "chiplet", "packaging",
                "technology", "phy_style", "spacing_mm", "hotspot_count", "hotspot_share"});
    netgen::DesignPoint p;
    std::string topo = string(member(doc, "topology", ""), "/topology");
    p.topology = parse_at("/topology", [&] { return netgen::parse_topology(topo); });
    p.rows = static_cast<int>(integer(member(doc, "rows", ""), "/rows"));
    p.cols = static_cast<int>(integer(member(doc, "cols", ""), "/cols"));
    if (p.rows < 1 || p.cols < 1 || p.rows > 64 || p.cols > 64) fail("/rows", "grid dimensions must be in [1, 64]");
    if (doc.contains("traffic")) {
        std::string s = string(doc.at("traffic"), "/traffic");
        p.traffic = parse_at("/traffic", [&] { return netgen::parse_traffic(s); });
    }
    if (doc.contains("routing")) {
        std::string s = string(doc.at("routing"), "/routing");
        p.routing = parse_at("/routing", [&] { return netgen::parse_routing(s); });
    }
    if (doc.contains("seed")) {
        int64_t s = integer(doc.at("seed"), "/seed");
        if (s < 0) fail("/seed", "must be non-negative");
        p.seed = static_cast<uint64_t>(s);
    }
    if (doc.contains("shg_bits")) p.shg_bits = bits_from_string(string(doc.at("shg_bits"), "/shg_bits"), "/shg_bits");
    if (p.topology == netgen::TopologyKind::shg && !doc.contains("shg_bits"))
        fail("/shg_bits", "the shg topology needs shg_bits");
    if (doc.contains("chiplet")) p.chiplet = chiplet_params_from_json(doc.at("chiplet"), "/chiplet", false);
    if (doc.contains("packaging"))
        p.packaging = nested(doc.at("packaging"), "/packaging", [](const json& j) { return packaging_from_json(j); });
    if (doc.contains("technology")) p.technology = tech_node_from_json(doc.at("technology"), "/technology");
    if (doc.contains("phy_style")) {
        std::string s = string(doc.at("phy_style"), "/phy_style");
        p.phy_style = parse_at("/phy_style", [&] { return netgen::parse_phy_style(s); });
    }
    if (doc.contains("spacing_mm")) p.spacing_mm = number(doc.at("spacing_mm"), "/spacing_mm");
    if (doc.contains("hotspot_count"))
        p.traffic_options.hotspot_count = static_cast<int>(integer(doc.at("hotspot_count"), "/hotspot_count"));
    if (doc.contains("hotspot_share")) p.traffic_options.hotspot_share = number(doc.at("hotspot_share"), "/hotspot_share");
    return p;
}

int64_t point_count(const Experiment& e) {
    int64_t per_grid_bits = 0;
    for (auto [r, c] : e.grid_sizes) {
        int64_t variants = 1;
        if (e.shg_sweep) {
            variants = int64_t{1} << (r + c - 4);
        } else if (!e.shg_bits.empty()) {
            variants = static_cast<int64_t>(e.shg_bits.size());
        }
        per_grid_bits += variants;
    }
    int64_t n = 0;
    for (auto t : e.topologies) {
        int64_t grids = t == netgen::TopologyKind::shg ? per_grid_bits : static_cast<int64_t>(e.grid_sizes.size());
        n += grids;
    }
    return n * static_cast<int64_t>(e.traffic_patterns.size() * e.packaging_variants.size() * e.chiplet_sets.size() *
                                    e.routing_algorithms.size() * e.seeds.size());
}

std::vector<PointSpec> expand(const Experiment& e) {
    std::vector<PointSpec> out;
    out.reserve(static_cast<std::size_t>(point_count(e)));
    for (auto topo : e.topologies)
        for (auto [rows, cols] : e.grid_sizes)
            for (auto traffic : e.traffic_patterns)
                for (const auto& pk : e.packaging_variants)
                    for (const auto& cs : e.chiplet_sets)
                        for (auto routing : e.routing_algorithms)
                            for (uint64_t seed : e.seeds) {
                                netgen::DesignPoint p;
                                p.topology = topo;
                                p.rows = rows;
                                p.cols = cols;
                                p.traffic = traffic;
                                p.routing = routing;
                                p.seed = seed;
                                p.chiplet = cs.params;
                                p.packaging = pk.packaging;
                                p.technology = e.technology;
                                p.traffic_options = e.traffic_options;
                                auto push = [&](std::vector<bool> bits) {
                                    PointSpec s;
                                    s.index = static_cast<int64_t>(out.size());
                                    s.point = p;
                                    s.point.shg_bits = std::move(bits);
                                    s.packaging_name = pk.name;
                                    s.chiplet_set_name = cs.name;
                                    out.push_back(std::move(s));
                                };
                                if (topo != netgen::TopologyKind::shg) {
                                    push({});
                                } else if (e.shg_sweep) {
                                    const uint64_t n = uint64_t{1} << (rows + cols - 4);
                                    for (uint64_t i = 0; i < n; ++i) push(netgen::shg_bits_from_index(i, rows, cols));
                                } else {
                                    for (const auto& s : e.shg_bits) push(bits_from_string(s, "/shg_bits"));
                                }
                            }
    return out;
}

double mesh_chiplet_area(int rows, int cols, const netgen::ChipletParams& params) {
    std::vector<int> degree(static_cast<std::size_t>(rows) * cols, 0);
    for (auto [a, b] : netgen::generate_topology(netgen::TopologyKind::mesh, rows, cols)) {
        ++degree[a];
        ++degree[b];
    }
    std::map<int, double> area_of;
    double sum = 0.0;
    for (int d : degree) {
        if (d == 0) throw ModelError("mesh baseline needs at least two chiplets");
        auto it = area_of.find(d);
        if (it == area_of.end())
            it = area_of
                     .emplace(d, netgen::generate_chiplet("baseline", params, d, netgen::PhyPlacementStyle::perimeter_even)
                                     .area_mm2())
                     .first;
        sum += it->second;
    }
    return sum;
}

ResultRow evaluate_point(const PointSpec& spec, EvaluationMode mode, const SimParams& sim) {
    const auto& p = spec.point;
    ResultRow row;
    row.index = spec.index;
    row.topology = netgen::to_string(p.topology);
    row.rows = p.rows;
    row.cols = p.cols;
    row.shg_bits = netgen::shg_bits_to_string(p.shg_bits);
    row.traffic = netgen::to_string(p.traffic);
    row.packaging = spec.packaging_name;
    row.chiplet_set = spec.chiplet_set_name;
    row.routing = netgen::to_string(p.routing);
    row.seed = p.seed;
    try {
        DesignBundle b = netgen::build_design(p);
        ValidationReport report = validate(b);
        if (!report.empty()) {
            std::string msg = "generated design is invalid: " + format_violation(report.front());
            if (report.size() > 1) msg += " (+" + std::to_string(report.size() - 1) + " more)";
            throw ModelError(msg);
        }
        auto t0 = std::chrono::steady_clock::now();
        PerfReport perf = estimate(b);
        row.proxy_time_s = seconds_since(t0);
        row.proxy_latency_cycles = perf.avg_latency_cycles;
        row.proxy_throughput_units = perf.throughput_units;
        row.proxy_throughput_rate = perf.throughput_rate;
        row.bottleneck_link = perf.bottleneck_edge;
        row.chiplet_area_mm2 = perf.area.chiplet_area_sum_mm2;
        row.interposer_area_mm2 = perf.area.interposer_area_mm2;
        row.power_w = perf.power_w;
        if (perf.cost) row.cost = perf.cost->total_cost;
        row.area_overhead = row.chiplet_area_mm2 / mesh_chiplet_area(p.rows, p.cols, p.chiplet) - 1.0;

        if (mode == EvaluationMode::proxy_plus_sim) {
            t0 = std::chrono::steady_clock::now();
            row.sim_latency_cycles = flitsim::zero_load_latency(b, b.routing_table, b.traffic, sim);
            row.sim_latency_time_s = seconds_since(t0);
            t0 = std::chrono::steady_clock::now();
            row.sim_saturation_rate = flitsim::saturation_throughput(b, b.routing_table, b.traffic, sim).rate;
            row.sim_saturation_time_s = seconds_since(t0);
        }
    } catch (const std::exception& e) {
        row.error = e.what();
        if (row.error.empty()) row.error = "evaluation failed";
    }
    return row;
}

const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> cols = {
        "index",         "topology",           "rows",
        "cols",          "shg_bits",           "traffic",
        "packaging",     "chiplet_set",        "routing",
        "seed",          "status",             "error",
        "proxy_latency_cycles", "proxy_throughput_units", "proxy_throughput_rate",
        "bottleneck_link", "chiplet_area_mm2", "interposer_area_mm2",
        "area_overhead", "power_w",            "cost",
        "sim_latency_cycles", "sim_saturation_rate", "proxy_time_s",
        "sim_latency_time_s", "sim_saturation_time_s"};
    return cols;
}

std::vector<std::string> to_fields(const ResultRow& r) {
    const bool ok = r.ok();
    auto val = [&](double v) { return ok ? fmt(v) : std::string(); };
    return {std::to_string(r.index),
            r.topology,
            std::to_string(r.rows),
            std::to_string(r.cols),
            r.shg_bits,
            r.traffic,
            r.packaging,
            r.chiplet_set,
            r.routing,
            std::to_string(r.seed),
            ok ? "ok" : "error",
            r.error,
            val(r.proxy_latency_cycles),
            val(r.proxy_throughput_units),
            val(r.proxy_throughput_rate),
            ok ? std::to_string(r.bottleneck_link) : std::string(),
            val(r.chiplet_area_mm2),
            val(r.interposer_area_mm2),
            val(r.area_overhead),
            val(r.power_w),
            fmt(r.cost),
            fmt(r.sim_latency_cycles),
            fmt(r.sim_saturation_rate),
            val(r.proxy_time_s),
            r.sim_latency_cycles ? fmt(r.sim_latency_time_s) : std::string(),
            r.sim_saturation_rate ? fmt(r.sim_saturation_time_s) : std::string()};
}

ResultRow row_from_fields(const csv::Table& t, std::size_t i) {
    const auto& f = t.rows.at(i);
    auto get = [&](const std::string& name) -> const std::string& {
        int c = t.column(name);
        if (c < 0) throw ModelError("results file is missing column '" + name + "'");
        return f[c];
    };
    auto num = [&](const std::string& name) {
        const std::string& s = get(name);
        if (s.empty()) return 0.0;
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw ModelError("row " + std::to_string(i + 1) + ": column '" + name + "' is not a number: " + s);
        }
    };
    auto opt = [&](const std::string& name) -> std::optional<double> {
        if (get(name).empty()) return std::nullopt;
        return num(name);
    };
    ResultRow r;
    r.index = static_cast<int64_t>(num("index"));
    r.topology = get("topology");
    r.rows = static_cast<int>(num("rows"));
    r.cols = static_cast<int>(num("cols"));
    r.shg_bits = get("shg_bits");
    r.traffic = get("traffic");
    r.packaging = get("packaging");
    r.chiplet_set = get("chiplet_set");
    r.routing = get("routing");
    r.seed = static_cast<uint64_t>(num("seed"));
    r.error = get("error");
    if (get("status") != "ok" && r.error.empty()) r.error = "error";
    r.proxy_latency_cycles = num("proxy_latency_cycles");
    r.proxy_throughput_units = num("proxy_throughput_units");
    r.proxy_throughput_rate = num("proxy_throughput_rate");
    r.bottleneck_link = get("bottleneck_link").empty() ? -1 : static_cast<int>(num("bottleneck_link"));
    r.chiplet_area_mm2 = num("chiplet_area_mm2");
    r.interposer_area_mm2 = num("interposer_area_mm2");
    r.area_overhead = num("area_overhead");
    r.power_w = num("power_w");
    r.cost = opt("cost");
    r.sim_latency_cycles = opt("sim_latency_cycles");
    r.sim_saturation_rate = opt("sim_saturation_rate");
    r.proxy_time_s = num("proxy_time_s");
    r.sim_latency_time_s = num("sim_latency_time_s");
    r.sim_saturation_time_s = num("sim_saturation_time_s");
    return r;
}

std::vector<ResultRow> read_results(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header.empty()) throw ModelError("no rows");
    for (const auto& c : result_columns())
        if (t.column(c) < 0) throw ModelError("results file is missing column '" + c + "'");
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < t.rows.size(); ++i) rows.push_back(row_from_fields(t, i));
    return rows;
}

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
    csv::write_row(out, result_columns());
    for (const auto& r : rows) csv::write_row(out, to_fields(r));
}

namespace {

// Single appender: rows arrive in any order and are written in index order.
class Sink {
public:
    Sink(std::ostream& out, std::size_t total, const RunOptions& options)
        : out_(out), rows_(total), options_(options) {
        csv::write_row(out_, result_columns());
    }

    void push(ResultRow row) {
        std::lock_guard<std::mutex> lock(mutex_);
        std::size_t i = static_cast<std::size_t>(row.index);
        rows_[i] = std::move(row);
        ready_.insert(i);
        while (!ready_.empty() && *ready_.begin() == next_) {
            csv::write_row(out_, to_fields(rows_[next_]));
            ready_.erase(ready_.begin());
            ++next_;
        }
        ++done_;
        if (options_.progress) options_.progress(static_cast<int64_t>(done_), static_cast<int64_t>(rows_.size()));
    }

    std::vector<ResultRow> take() { return std::move(rows_); }

private:
    std::ostream& out_;
    std::vector<ResultRow> rows_;
    const RunOptions& options_;
    std::mutex mutex_;
    std::set<std::size_t> ready_;
    std::size_t next_ = 0;
    std::size_t done_ = 0;
};

}  // namespace

std::vector<ResultRow> run_experiments(const Experiment& experiment, const std::filesystem::path& output_dir,
                                       const RunOptions& options) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    std::ofstream out(output_dir / "results.csv", std::ios::binary);
    if (!out) throw ModelError("cannot write to output directory " + output_dir.string());

    const std::vector<PointSpec> specs = expand(experiment);
    Sink sink(out, specs.size(), options);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < specs.size(); i = next++) {
            ResultRow row = evaluate_point(specs[i], experiment.mode, experiment.simulator);
            if (experiment.write_inputs && row.ok()) {
                save_design(netgen::build_design(specs[i].point), output_dir / "inputs",
                            "point_" + std::to_string(specs[i].index));
            }
            sink.push(std::move(row));
        }
    };
    unsigned n = experiment.workers > 0 ? static_cast<unsigned>(experiment.workers)
                                        : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(specs.size(), 1)));
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned i = 0; i < n; ++i)
        pool.emplace_back([&] {
            try {
                worker();
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = specs.size();
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    out.flush();
    if (!out) throw ModelError("failed writing results to " + output_dir.string());

    std::vector<ResultRow> rows = sink.take();
    write_json_file(output_dir / "summary.json", summary_json(rows));
    return rows;
}

std::vector<std::size_t> pareto_front(const std::vector<ResultRow>& rows, double max_area_overhead) {
    constexpr double eps = 1e-9;
    std::vector<std::size_t> feasible;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].ok() && rows[i].area_overhead <= max_area_overhead + eps) feasible.push_back(i);
    std::sort(feasible.begin(), feasible.end(), [&](std::size_t a, std::size_t b) {
        const auto &x = rows[a], &y = rows[b];
        if (x.proxy_latency_cycles != y.proxy_latency_cycles) return x.proxy_latency_cycles < y.proxy_latency_cycles;
        if (x.proxy_throughput_units != y.proxy_throughput_units)
            return x.proxy_throughput_units > y.proxy_throughput_units;
        return a < b;
    });
    // Sweep by latency: a row survives when its throughput beats every row of
    // strictly lower latency and is the best of its own latency group.
    std::vector<std::size_t> front;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < feasible.size();) {
        std::size_t h = g;
        const double lat = rows[feasible[g]].proxy_latency_cycles;
        while (h < feasible.size() && rows[feasible[h]].proxy_latency_cycles == lat) ++h;
        const double top = rows[feasible[g]].proxy_throughput_units;
        if (top > best)
            for (std::size_t k = g; k < h && rows[feasible[k]].proxy_throughput_units == top; ++k)
                front.push_back(feasible[k]);
        best = std::max(best, top);
        g = h;
    }
    std::sort(front.begin(), front.end());
    return front;
}

std::vector<Comparison> compare_proxy_vs_sim(const std::vector<ResultRow>& rows) {
    std::vector<Comparison> out;
    for (const auto& r : rows) {
        if (!r.ok()) continue;
        Comparison c;
        c.index = r.index;
        c.traffic = r.traffic;
        const bool has_lat = r.sim_latency_cycles && *r.sim_latency_cycles > 0.0;
        const bool has_thr = r.sim_saturation_rate && *r.sim_saturation_rate > 0.0;
        c.valid = has_lat && has_thr && r.proxy_time_s > 0.0;
        if (has_lat) {
            c.latency_error = std::abs(r.proxy_latency_cycles - *r.sim_latency_cycles) / *r.sim_latency_cycles;
            if (r.proxy_time_s > 0.0) c.latency_speedup = r.sim_latency_time_s / r.proxy_time_s;
        }
        if (has_thr) {
            c.throughput_error = std::abs(r.proxy_throughput_rate - *r.sim_saturation_rate) / *r.sim_saturation_rate;
            if (r.proxy_time_s > 0.0) c.throughput_speedup = r.sim_saturation_time_s / r.proxy_time_s;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<ComparisonSummary> summarize(const std::vector<Comparison>& comparisons) {
    std::map<std::string, ComparisonSummary> by;
    auto add = [&](const std::string& key, const Comparison& c) {
        auto& s = by[key];
        s.traffic = key;
        ++s.rows;
        s.mean_latency_error += c.latency_error;
        s.mean_throughput_error += c.throughput_error;
        s.mean_latency_speedup += c.latency_speedup;
        s.mean_throughput_speedup += c.throughput_speedup;
    };
    for (const auto& c : comparisons) {
        if (!c.valid) continue;
        add(c.traffic, c);
        add("all", c);
    }
    std::vector<ComparisonSummary> out;
    for (auto& [key, s] : by) {
        s.mean_latency_error /= s.rows;
        s.mean_throughput_error /= s.rows;
        s.mean_latency_speedup /= s.rows;
        s.mean_throughput_speedup /= s.rows;
        if (key != "all") out.push_back(s);
    }
    if (by.count("all")) out.push_back(by["all"]);
    return out;
}

json summary_json(const std::vector<ResultRow>& rows) {
    json s;
    int64_t ok = 0;
    double lat = 0.0, thr = 0.0;
    for (const auto& r : rows) {
        if (!r.ok()) continue;
        ++ok;
        lat += r.proxy_latency_cycles;
        thr += r.proxy_throughput_rate;
    }
    s["points"] = rows.size();
    s["errors"] = static_cast<int64_t>(rows.size()) - ok;
    s["mean_proxy_latency_cycles"] = ok ? lat / static_cast<double>(ok) : 0.0;
    s["mean_proxy_throughput_rate"] = ok ? thr / static_cast<double>(ok) : 0.0;
    auto indices = [&](double limit) {
        json a = json::array();
        for (std::size_t i : pareto_front(rows, limit)) a.push_back(rows[i].index);
        return a;
    };
    s["pareto_indices"] = indices(std::numeric_limits<double>::infinity());
    s["pareto_indices_zero_overhead"] = indices(0.0);
    std::vector<ComparisonSummary> cmp = summarize(compare_proxy_vs_sim(rows));
    if (!cmp.empty()) {
        for (const auto& c : cmp)
            s["proxy_vs_sim"][c.traffic] = {{"rows", c.rows},
                                            {"mean_latency_error", c.mean_latency_error},
                                            {"mean_throughput_error", c.mean_throughput_error},
                                            {"mean_latency_speedup", c.mean_latency_speedup},
                                            {"mean_throughput_speedup", c.mean_throughput_speedup}};
    }
    return s;
}

}  // namespace chipnet::dse
