#pragma once

// Design-space exploration: expands an experiment into design points,
// evaluates them on a worker pool and aggregates the results.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chipnet/csv.hpp"
#include "chipnet/netgen.hpp"

namespace chipnet::dse {

enum class EvaluationMode { proxy_only, proxy_plus_sim };

struct NamedPackaging {
    std::string name;
    Packaging packaging;
};

struct NamedChipletParams {
    std::string name;
    netgen::ChipletParams params;
};

struct Experiment {
    std::vector<netgen::TopologyKind> topologies;
    std::vector<std::pair<int, int>> grid_sizes;
    std::vector<netgen::TrafficPattern> traffic_patterns;
    std::vector<NamedPackaging> packaging_variants;
    std::vector<NamedChipletParams> chiplet_sets;
    std::vector<netgen::RoutingAlgorithm> routing_algorithms;
    std::vector<uint64_t> seeds;
    EvaluationMode mode = EvaluationMode::proxy_only;
    bool shg_sweep = false;                  // enumerate every bit vector of each grid
    std::vector<std::string> shg_bits;       // explicit vectors when not sweeping
    std::optional<TechNode> technology;
    SimParams simulator;
    netgen::TrafficOptions traffic_options;
    int workers = 0;  // 0: hardware concurrency
    bool write_inputs = false;
};

// Throws InputError with a JSON pointer on malformed documents.
Experiment experiment_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Experiment& experiment);

// A single design point: {"topology", "rows", "cols", "traffic", "routing",
// "seed", "shg_bits", "chiplet", "packaging", "technology", "phy_style",
// "spacing_mm"}; everything but topology, rows and cols is optional.
netgen::DesignPoint design_point_from_json(const nlohmann::json& doc);

struct PointSpec {
    int64_t index = 0;
    netgen::DesignPoint point;
    std::string packaging_name;
    std::string chiplet_set_name;
};

// Cartesian product in a fixed order: topology, grid, traffic, packaging,
// chiplet set, routing, seed, SHG bits.
std::vector<PointSpec> expand(const Experiment& experiment);
int64_t point_count(const Experiment& experiment);

struct ResultRow {
    int64_t index = 0;
    std::string topology;
    int rows = 0;
    int cols = 0;
    std::string shg_bits;
    std::string traffic;
    std::string packaging;
    std::string chiplet_set;
    std::string routing;
    uint64_t seed = 0;
    std::string error;  // empty when the point evaluated

    double proxy_latency_cycles = 0.0;
    double proxy_throughput_units = 0.0;
    double proxy_throughput_rate = 0.0;  // flits/chiplet/cycle
    int bottleneck_link = -1;
    double chiplet_area_mm2 = 0.0;
    double interposer_area_mm2 = 0.0;
    double area_overhead = 0.0;  // chiplet area vs. the mesh of the same grid and chiplet set
    double power_w = 0.0;
    std::optional<double> cost;

    std::optional<double> sim_latency_cycles;
    std::optional<double> sim_saturation_rate;

    double proxy_time_s = 0.0;
    double sim_latency_time_s = 0.0;
    double sim_saturation_time_s = 0.0;

    bool ok() const { return error.empty(); }
};

const std::vector<std::string>& result_columns();
std::vector<std::string> to_fields(const ResultRow& row);
ResultRow row_from_fields(const csv::Table& table, std::size_t row);
std::vector<ResultRow> read_results(const std::string& path);
void write_results(std::ostream& out, const std::vector<ResultRow>& rows);

// Evaluates one point; failures become error rows.
ResultRow evaluate_point(const PointSpec& spec, EvaluationMode mode, const SimParams& sim);

// Sum of chiplet areas of the mesh on the same grid with the same chiplet parameters.
double mesh_chiplet_area(int rows, int cols, const netgen::ChipletParams& params);

struct RunOptions {
    std::function<void(int64_t done, int64_t total)> progress;
};

// Writes results.csv (rows in index order, streamed by a single sink) and
// summary.json into output_dir; returns the rows.
std::vector<ResultRow> run_experiments(const Experiment& experiment, const std::filesystem::path& output_dir,
                                       const RunOptions& options = {});

// Indices of rows on the latency (min) / throughput (max) front among error-free
// rows with area_overhead <= max_area_overhead.
std::vector<std::size_t> pareto_front(const std::vector<ResultRow>& rows, double max_area_overhead);

struct Comparison {
    int64_t index = 0;
    std::string traffic;
    bool valid = false;  // false when a simulator value is missing or zero
    double latency_error = 0.0;
    double throughput_error = 0.0;
    double latency_speedup = 0.0;
    double throughput_speedup = 0.0;
};

struct ComparisonSummary {
    std::string traffic;
    int rows = 0;
    double mean_latency_error = 0.0;
    double mean_throughput_error = 0.0;
    double mean_latency_speedup = 0.0;
    double mean_throughput_speedup = 0.0;
};

std::vector<Comparison> compare_proxy_vs_sim(const std::vector<ResultRow>& rows);
// Averages over valid comparisons, one entry per traffic pattern plus "all".
std::vector<ComparisonSummary> summarize(const std::vector<Comparison>& comparisons);

nlohmann::json summary_json(const std::vector<ResultRow>& rows);

}  // namespace chipnet::dse
