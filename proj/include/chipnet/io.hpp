#pragma once

// JSON documents for every input kind, and the design file that ties them together.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "chipnet/model.hpp"

namespace chipnet {

// Parse failure. `where()` is a JSON pointer into the offending document.
class InputError : public std::runtime_error {
public:
    InputError(std::string file, std::string where, const std::string& message);

    const std::string& file() const { return file_; }
    const std::string& where() const { return where_; }
    const std::string& message() const { return message_; }

private:
    std::string file_;
    std::string where_;
    std::string message_;
};

// Per-kind document codecs. Decoders reject unknown fields.
std::vector<ChipletDef> chiplets_from_json(const nlohmann::json& doc);
Placement placement_from_json(const nlohmann::json& doc);
Topology topology_from_json(const nlohmann::json& doc);
Packaging packaging_from_json(const nlohmann::json& doc);
RoutingTable routing_table_from_json(const nlohmann::json& doc);
Traffic traffic_from_json(const nlohmann::json& doc);
Trace trace_from_json(const nlohmann::json& doc);
Technology technology_from_json(const nlohmann::json& doc);
SimParams sim_params_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const std::vector<ChipletDef>& chiplets);
nlohmann::json to_json(const Placement& placement);
nlohmann::json to_json(const Topology& topology);
nlohmann::json to_json(const Packaging& packaging);
nlohmann::json to_json(const RoutingTable& table);
nlohmann::json to_json(const Traffic& traffic);
nlohmann::json to_json(const Trace& trace);
nlohmann::json to_json(const Technology& technology);
nlohmann::json to_json(const SimParams& params);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

// Loads a design file and every input it references (paths relative to the
// design file). Missing optional inputs (trace, simulator) stay empty.
DesignBundle load_design(const std::filesystem::path& design_path);

// Writes one document per input kind plus `<stem>.json` into `dir` and
// returns the design file path.
std::filesystem::path save_design(const DesignBundle& bundle, const std::filesystem::path& dir,
                                  const std::string& stem = "design");

}  // namespace chipnet
