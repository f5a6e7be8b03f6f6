#include "chipnet/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace chipnet {

using nlohmann::json;
namespace fs = std::filesystem;

InputError::InputError(std::string file, std::string where, const std::string& message)
    : std::runtime_error((file.empty() ? std::string("<document>") : file) + ":" +
                         (where.empty() ? std::string("/") : where) + ": " + message),
      file_(std::move(file)),
      where_(std::move(where)),
      message_(message) {}

namespace {

// Typed field access over one JSON object; remembers which keys were read so
// leftover keys can be reported as unknown.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] static void fail(const std::string& where, const std::string& msg) {
        throw InputError("", where, msg);
    }

    std::string child(const std::string& key) const { return path_ + "/" + key; }

    const json& at(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) fail(child(key), "missing required field '" + key + "'");
        return *it;
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    double number(const std::string& key) { return as_number(at(key), child(key)); }
    double number_or(const std::string& key, double fallback) {
        seen_.insert(key);
        return has(key) ? as_number(obj_.at(key), child(key)) : fallback;
    }
    int64_t integer(const std::string& key) { return as_integer(at(key), child(key)); }
    int64_t integer_or(const std::string& key, int64_t fallback) {
        seen_.insert(key);
        return has(key) ? as_integer(obj_.at(key), child(key)) : fallback;
    }
    std::string string(const std::string& key) { return as_string(at(key), child(key)); }
    std::string string_or(const std::string& key, std::string fallback) {
        seen_.insert(key);
        return has(key) ? as_string(obj_.at(key), child(key)) : fallback;
    }
    bool boolean(const std::string& key) {
        const json& v = at(key);
        if (!v.is_boolean()) fail(child(key), "expected a boolean");
        return v.get<bool>();
    }
    const json& array(const std::string& key) {
        const json& v = at(key);
        if (!v.is_array()) fail(child(key), "expected an array");
        return v;
    }
    const json& array_or_empty(const std::string& key) {
        static const json empty = json::array();
        seen_.insert(key);
        if (!has(key)) return empty;
        const json& v = obj_.at(key);
        if (!v.is_array()) fail(child(key), "expected an array");
        return v;
    }

    // Throws on any key never requested.
    void done() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) fail(child(it.key()), "unknown field '" + it.key() + "'");
        }
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) fail(where, "expected a number");
        return v.get<double>();
    }
    static int64_t as_integer(const json& v, const std::string& where) {
        if (v.is_number_integer()) return v.get<int64_t>();
        if (v.is_number_float()) {
            double d = v.get<double>();
            if (d == static_cast<double>(static_cast<int64_t>(d))) return static_cast<int64_t>(d);
        }
        fail(where, "expected an integer");
    }
    static std::string as_string(const json& v, const std::string& where) {
        if (!v.is_string()) fail(where, "expected a string");
        return v.get<std::string>();
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string idx(const std::string& base, size_t i) { return base + "/" + std::to_string(i); }

Point point_from(Fields& f) { return Point{f.number("x"), f.number("y")}; }

Rotation rotation_from(int64_t deg, const std::string& where) {
    switch (deg) {
        case 0: return Rotation::deg0;
        case 90: return Rotation::deg90;
        case 180: return Rotation::deg180;
        case 270: return Rotation::deg270;
        default: Fields::fail(where, "rotation must be one of 0, 90, 180, 270");
    }
}

Endpoint endpoint_from(const json& j, const std::string& where) {
    Fields f(j, where);
    Endpoint e;
    std::string type = f.string("type");
    if (type == "chiplet") {
        e.kind = EndpointKind::chiplet;
        e.index = static_cast<int>(f.integer("index"));
        e.phy_index = static_cast<int>(f.integer("phy"));
    } else if (type == "interposer_router") {
        e.kind = EndpointKind::interposer_router;
        e.index = static_cast<int>(f.integer("index"));
    } else {
        Fields::fail(f.child("type"), "endpoint type must be 'chiplet' or 'interposer_router'");
    }
    f.done();
    return e;
}

json endpoint_to_json(const Endpoint& e) {
    if (e.kind == EndpointKind::chiplet) return {{"type", "chiplet"}, {"index", e.index}, {"phy", e.phy_index}};
    return {{"type", "interposer_router"}, {"index", e.index}};
}

}  // namespace

std::vector<ChipletDef> chiplets_from_json(const json& doc) {
    Fields top(doc, "");
    const json& arr = top.array("chiplets");
    top.done();
    std::vector<ChipletDef> out;
    std::set<std::string> names;
    for (size_t i = 0; i < arr.size(); ++i) {
        std::string where = idx("/chiplets", i);
        Fields f(arr[i], where);
        ChipletDef c;
        c.name = f.string("name");
        c.kind = f.string_or("kind", "compute");
        c.width_mm = f.number("width_mm");
        c.height_mm = f.number("height_mm");
        c.internal_latency_cycles = f.number("internal_latency_cycles");
        c.phy_latency_cycles = f.number("phy_latency_cycles");
        c.power_w = f.number("power_w");
        c.bump_pitch_mm = f.number("bump_pitch_mm");
        const json& phys = f.array("phys");
        for (size_t p = 0; p < phys.size(); ++p) {
            Fields pf(phys[p], idx(where + "/phys", p));
            PhyDef phy;
            phy.position = point_from(pf);
            phy.area_fraction = pf.number("area_fraction");
            pf.done();
            c.phys.push_back(phy);
        }
        f.done();
        if (!names.insert(c.name).second) Fields::fail(where + "/name", "duplicate chiplet name '" + c.name + "'");
        out.push_back(std::move(c));
    }
    return out;
}

json to_json(const std::vector<ChipletDef>& chiplets) {
    json arr = json::array();
    for (const auto& c : chiplets) {
        json phys = json::array();
        for (const auto& p : c.phys)
            phys.push_back({{"x", p.position.x}, {"y", p.position.y}, {"area_fraction", p.area_fraction}});
        arr.push_back({{"name", c.name},
                       {"kind", c.kind},
                       {"width_mm", c.width_mm},
                       {"height_mm", c.height_mm},
                       {"internal_latency_cycles", c.internal_latency_cycles},
                       {"phy_latency_cycles", c.phy_latency_cycles},
                       {"power_w", c.power_w},
                       {"bump_pitch_mm", c.bump_pitch_mm},
                       {"phys", std::move(phys)}});
    }
    return {{"chiplets", std::move(arr)}};
}

Placement placement_from_json(const json& doc) {
    Fields top(doc, "");
    const json& inst = top.array("chiplets");
    const json& routers = top.array_or_empty("interposer_routers");
    top.done();
    Placement out;
    for (size_t i = 0; i < inst.size(); ++i) {
        std::string where = idx("/chiplets", i);
        Fields f(inst[i], where);
        PlacedChiplet pc;
        pc.chiplet_name = f.string("name");
        pc.position = point_from(f);
        pc.rotation = rotation_from(f.integer_or("rotation", 0), where + "/rotation");
        f.done();
        out.instances.push_back(std::move(pc));
    }
    for (size_t i = 0; i < routers.size(); ++i) {
        Fields f(routers[i], idx("/interposer_routers", i));
        out.interposer_routers.push_back(InterposerRouter{point_from(f)});
        f.done();
    }
    return out;
}

json to_json(const Placement& placement) {
    json inst = json::array();
    for (const auto& pc : placement.instances)
        inst.push_back({{"name", pc.chiplet_name},
                        {"x", pc.position.x},
                        {"y", pc.position.y},
                        {"rotation", static_cast<int>(pc.rotation)}});
    json routers = json::array();
    for (const auto& r : placement.interposer_routers) routers.push_back({{"x", r.position.x}, {"y", r.position.y}});
    return {{"chiplets", std::move(inst)}, {"interposer_routers", std::move(routers)}};
}

Topology topology_from_json(const json& doc) {
    Fields top(doc, "");
    const json& links = top.array("links");
    top.done();
    Topology out;
    for (size_t i = 0; i < links.size(); ++i) {
        std::string where = idx("/links", i);
        Fields f(links[i], where);
        Link l{endpoint_from(f.at("a"), where + "/a"), endpoint_from(f.at("b"), where + "/b")};
        f.done();
        out.links.push_back(l);
    }
    return out;
}

json to_json(const Topology& topology) {
    json links = json::array();
    for (const auto& l : topology.links) links.push_back({{"a", endpoint_to_json(l.a)}, {"b", endpoint_to_json(l.b)}});
    return {{"links", std::move(links)}};
}

Packaging packaging_from_json(const json& doc) {
    Fields f(doc, "");
    Packaging p;
    p.has_active_interposer = f.boolean("has_active_interposer");
    p.router_latency_cycles = f.number_or("router_latency_cycles", 0.0);
    std::string routing = f.string("link_routing");
    if (routing == "manhattan") {
        p.link_routing = LinkRouting::manhattan;
    } else if (routing == "direct") {
        p.link_routing = LinkRouting::direct;
    } else {
        Fields::fail("/link_routing", "link_routing must be 'manhattan' or 'direct'");
    }
    {
        Fields lat(f.at("link_latency"), "/link_latency");
        bool has_const = lat.has("constant");
        bool has_per_mm = lat.has("per_mm");
        if (has_const == has_per_mm)
            Fields::fail("/link_latency", "link_latency needs exactly one of 'constant' or 'per_mm'");
        if (has_const) {
            p.link_latency = ConstantLatency{lat.number("constant")};
        } else {
            p.link_latency = PerMmLatency{lat.number("per_mm")};
        }
        lat.done();
    }
    p.link_power_per_mm_w = f.number_or("link_power_per_mm_w", 0.0);
    p.interposer_power_w = f.number_or("interposer_power_w", 0.0);
    p.packaging_cost = f.number_or("packaging_cost", 0.0);
    p.non_data_wires = static_cast<int>(f.integer_or("non_data_wires", 0));
    f.done();
    return p;
}

json to_json(const Packaging& p) {
    json lat;
    if (const auto* c = std::get_if<ConstantLatency>(&p.link_latency)) {
        lat = {{"constant", c->cycles}};
    } else {
        lat = {{"per_mm", std::get<PerMmLatency>(p.link_latency).cycles_per_mm}};
    }
    return {{"has_active_interposer", p.has_active_interposer},
            {"router_latency_cycles", p.router_latency_cycles},
            {"link_routing", to_string(p.link_routing)},
            {"link_latency", std::move(lat)},
            {"link_power_per_mm_w", p.link_power_per_mm_w},
            {"interposer_power_w", p.interposer_power_w},
            {"packaging_cost", p.packaging_cost},
            {"non_data_wires", p.non_data_wires}};
}

RoutingTable routing_table_from_json(const json& doc) {
    Fields top(doc, "");
    const json& tables = top.array("tables");
    top.done();
    RoutingTable out;
    out.next_hop.resize(tables.size());
    std::vector<bool> filled(tables.size(), false);
    for (size_t i = 0; i < tables.size(); ++i) {
        std::string where = idx("/tables", i);
        Fields f(tables[i], where);
        int64_t node = f.integer("node");
        if (node < 0 || node >= static_cast<int64_t>(tables.size()) || filled[node])
            Fields::fail(where + "/node", "node ids must be 0..n-1, each listed once");
        filled[node] = true;
        const json& hops = f.at("next_hop");
        if (!hops.is_object()) Fields::fail(where + "/next_hop", "expected an object");
        for (auto it = hops.begin(); it != hops.end(); ++it) {
            std::string key_where = where + "/next_hop/" + it.key();
            int dst = 0;
            try {
                size_t used = 0;
                dst = std::stoi(it.key(), &used);
                if (used != it.key().size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                Fields::fail(key_where, "destination keys must be integers");
            }
            out.next_hop[node][dst] = static_cast<int>(Fields::as_integer(it.value(), key_where));
        }
        f.done();
    }
    return out;
}

json to_json(const RoutingTable& table) {
    json tables = json::array();
    for (size_t n = 0; n < table.next_hop.size(); ++n) {
        json hops = json::object();
        for (const auto& [dst, link] : table.next_hop[n]) hops[std::to_string(dst)] = link;
        tables.push_back({{"node", n}, {"next_hop", std::move(hops)}});
    }
    return {{"tables", std::move(tables)}};
}

Traffic traffic_from_json(const json& doc) {
    Fields top(doc, "");
    const json& arr = top.array("entries");
    top.done();
    Traffic out;
    for (size_t i = 0; i < arr.size(); ++i) {
        Fields f(arr[i], idx("/entries", i));
        TrafficEntry e;
        e.src = static_cast<int>(f.integer("src"));
        e.dst = static_cast<int>(f.integer("dst"));
        e.amount = f.number("amount");
        f.done();
        out.entries.push_back(e);
    }
    return out;
}

json to_json(const Traffic& traffic) {
    json arr = json::array();
    for (const auto& e : traffic.entries) arr.push_back({{"src", e.src}, {"dst", e.dst}, {"amount", e.amount}});
    return {{"entries", std::move(arr)}};
}

Trace trace_from_json(const json& doc) {
    Fields top(doc, "");
    const json& arr = top.array("messages");
    top.done();
    Trace out;
    for (size_t i = 0; i < arr.size(); ++i) {
        std::string where = idx("/messages", i);
        Fields f(arr[i], where);
        TraceMessage m;
        m.id = f.integer("id");
        m.earliest_injection_cycle = f.integer("cycle");
        m.src = static_cast<int>(f.integer("src"));
        m.dst = static_cast<int>(f.integer("dst"));
        m.size_flits = static_cast<int>(f.integer_or("size_flits", 1));
        const json& deps = f.array_or_empty("deps");
        for (size_t d = 0; d < deps.size(); ++d) m.deps.push_back(Fields::as_integer(deps[d], idx(where + "/deps", d)));
        f.done();
        out.messages.push_back(std::move(m));
    }
    return out;
}

json to_json(const Trace& trace) {
    json arr = json::array();
    for (const auto& m : trace.messages)
        arr.push_back({{"id", m.id},
                       {"cycle", m.earliest_injection_cycle},
                       {"src", m.src},
                       {"dst", m.dst},
                       {"size_flits", m.size_flits},
                       {"deps", m.deps}});
    return {{"messages", std::move(arr)}};
}

Technology technology_from_json(const json& doc) {
    Fields top(doc, "");
    const json& nodes = top.array("nodes");
    Technology out;
    for (size_t i = 0; i < nodes.size(); ++i) {
        Fields f(nodes[i], idx("/nodes", i));
        TechNode t;
        t.name = f.string("name");
        t.wafer_diameter_mm = f.number("wafer_diameter_mm");
        t.wafer_cost = f.number("wafer_cost");
        t.defect_density_per_mm2 = f.number("defect_density_per_mm2");
        t.clustering_parameter = f.number("clustering_parameter");
        f.done();
        out.nodes.push_back(std::move(t));
    }
    const json& assign = top.at("assignment");
    if (!assign.is_object()) Fields::fail("/assignment", "expected an object");
    for (auto it = assign.begin(); it != assign.end(); ++it)
        out.assignment[it.key()] = Fields::as_string(it.value(), "/assignment/" + it.key());
    top.done();
    return out;
}

json to_json(const Technology& technology) {
    json nodes = json::array();
    for (const auto& t : technology.nodes)
        nodes.push_back({{"name", t.name},
                         {"wafer_diameter_mm", t.wafer_diameter_mm},
                         {"wafer_cost", t.wafer_cost},
                         {"defect_density_per_mm2", t.defect_density_per_mm2},
                         {"clustering_parameter", t.clustering_parameter}});
    json assign = json::object();
    for (const auto& [k, v] : technology.assignment) assign[k] = v;
    return {{"nodes", std::move(nodes)}, {"assignment", std::move(assign)}};
}

SimParams sim_params_from_json(const json& doc) {
    Fields f(doc, "");
    SimParams p;
    p.vcs_per_port = static_cast<int>(f.integer_or("vcs_per_port", p.vcs_per_port));
    p.buffer_flits_per_vc = static_cast<int>(f.integer_or("buffer_flits_per_vc", p.buffer_flits_per_vc));
    p.packet_size_flits = static_cast<int>(f.integer_or("packet_size_flits", p.packet_size_flits));
    p.warmup_cycles = f.integer_or("warmup_cycles", p.warmup_cycles);
    p.measurement_cycles = f.integer_or("measurement_cycles", p.measurement_cycles);
    p.drain_cycle_limit = f.integer_or("drain_cycle_limit", p.drain_cycle_limit);
    p.latency_saturation_factor = f.number_or("latency_saturation_factor", p.latency_saturation_factor);
    p.seed = static_cast<uint64_t>(f.integer_or("seed", static_cast<int64_t>(p.seed)));
    f.done();
    return p;
}

json to_json(const SimParams& p) {
    return {{"vcs_per_port", p.vcs_per_port},
            {"buffer_flits_per_vc", p.buffer_flits_per_vc},
            {"packet_size_flits", p.packet_size_flits},
            {"warmup_cycles", p.warmup_cycles},
            {"measurement_cycles", p.measurement_cycles},
            {"drain_cycle_limit", p.drain_cycle_limit},
            {"latency_saturation_factor", p.latency_saturation_factor},
            {"seed", p.seed}};
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path.string(), "", "cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string(), "byte " + std::to_string(e.byte), "malformed JSON");
    }
}

void write_json_file(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

template <class Decode>
auto load_part(const fs::path& path, Decode decode) {
    json doc = read_json_file(path);
    try {
        return decode(doc);
    } catch (const InputError& e) {
        throw InputError(path.string(), e.where(), e.message());
    }
}

const char* const kRequiredKinds[] = {"chiplets", "placement", "topology", "packaging",
                                      "routing_table", "traffic", "technology"};

}  // namespace

DesignBundle load_design(const fs::path& design_path) {
    json design = read_json_file(design_path);
    fs::path base = design_path.parent_path();
    std::map<std::string, fs::path> paths;
    try {
        Fields f(design, "");
        for (const char* kind : kRequiredKinds) paths[kind] = base / f.string(kind);
        for (const char* kind : {"trace", "simulator"}) {
            if (f.has(kind)) paths[kind] = base / f.string(kind);
        }
        f.done();
    } catch (const InputError& e) {
        throw InputError(design_path.string(), e.where(), e.message());
    }

    for (const auto& [kind, p] : paths) {
        if (!fs::exists(p)) throw InputError(design_path.string(), "/" + kind, "referenced file does not exist: " + p.string());
    }

    DesignBundle b;
    b.chiplets = load_part(paths["chiplets"], chiplets_from_json);
    b.placement = load_part(paths["placement"], placement_from_json);
    b.topology = load_part(paths["topology"], topology_from_json);
    b.packaging = load_part(paths["packaging"], packaging_from_json);
    b.routing_table = load_part(paths["routing_table"], routing_table_from_json);
    b.traffic = load_part(paths["traffic"], traffic_from_json);
    b.technology = load_part(paths["technology"], technology_from_json);
    if (paths.count("trace")) b.trace = load_part(paths["trace"], trace_from_json);
    if (paths.count("simulator")) b.simulator = load_part(paths["simulator"], sim_params_from_json);
    return b;
}

fs::path save_design(const DesignBundle& b, const fs::path& dir, const std::string& stem) {
    fs::create_directories(dir);
    json design;
    auto emit = [&](const std::string& kind, const json& doc) {
        std::string file = stem + "." + kind + ".json";
        write_json_file(dir / file, doc);
        design[kind] = file;
    };
    emit("chiplets", to_json(b.chiplets));
    emit("placement", to_json(b.placement));
    emit("topology", to_json(b.topology));
    emit("packaging", to_json(b.packaging));
    emit("routing_table", to_json(b.routing_table));
    emit("traffic", to_json(b.traffic));
    emit("technology", to_json(b.technology));
    if (b.trace) emit("trace", to_json(*b.trace));
    if (b.simulator) emit("simulator", to_json(*b.simulator));
    fs::path out = dir / (stem + ".json");
    write_json_file(out, design);
    return out;
}

}  // namespace chipnet
