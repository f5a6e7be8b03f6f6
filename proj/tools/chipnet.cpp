// chipnet: command-line front end.
// Exit status: 0 success, 1 invalid input, 2 runtime error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "chipnet/dse.hpp"
#include "chipnet/flitsim.hpp"
#include "chipnet/io.hpp"
#include "chipnet/proxy.hpp"
#include "chipnet/render.hpp"
#include "chipnet/reports.hpp"
#include "chipnet/validate.hpp"

using namespace chipnet;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

// Input problems map to exit status 1.
struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

DesignBundle load_valid(const std::string& path) {
    DesignBundle b;
    try {
        b = load_design(path);
    } catch (const InputError& e) {
        throw InvalidInput((e.file().empty() ? path : e.file()) + ": " + (e.where().empty() ? "/" : e.where()) +
                           ": " + e.message());
    }
    ValidationReport report = validate(b);
    if (!report.empty()) {
        std::string msg = path + ": " + std::to_string(report.size()) + " violation(s)";
        for (const auto& v : report) msg += "\n  " + format_violation(v);
        throw InvalidInput(msg);
    }
    return b;
}

json load_json(const std::string& path) {
    try {
        return read_json_file(path);
    } catch (const InputError& e) {
        throw InvalidInput(path + ": " + e.where() + ": " + e.message());
    }
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
    if (!out) throw std::runtime_error("failed writing " + out_path);
}

// Unreadable or malformed tables are input errors.
csv::Table read_table(const std::string& path) {
    try {
        return csv::read_file(path);
    } catch (const std::exception& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

std::vector<dse::ResultRow> read_rows(const std::string& path) {
    std::vector<dse::ResultRow> rows;
    try {
        rows = dse::read_results(path);
    } catch (const std::exception& e) {
        throw InvalidInput(path + ": " + e.what());
    }
    if (rows.empty()) throw InvalidInput(path + ": no rows");
    return rows;
}

std::string csv_text(const csv::Table& t) {
    std::ostringstream os;
    csv::write_row(os, t.header);
    for (const auto& r : t.rows) csv::write_row(os, r);
    return os.str();
}

json sim_json(const flitsim::SimResult& r) {
    return {{"avg_packet_latency_cycles", r.avg_packet_latency_cycles},
            {"offered_rate", r.offered_rate},
            {"accepted_rate", r.accepted_rate},
            {"delivered_packets", r.delivered_packets},
            {"saturated", r.saturated},
            {"saturation_reason", r.saturation_reason},
            {"makespan_cycles", r.makespan_cycles},
            {"cycles_simulated", r.cycles_simulated}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chiplet interconnect design toolkit: validation, latency/throughput proxies, "
                 "flit-level simulation and design-space sweeps"};
    app.require_subcommand(1);
    std::string design, out_path, results, kind, experiment_path;
    bool edges = false, saturation = false, trace = false;
    double rate = -1.0, max_overhead = std::numeric_limits<double>::infinity();
    int workers = -1;

    auto* c_validate = app.add_subcommand("validate", "Check a design against every input invariant");
    c_validate->add_option("design", design, "design file")->required();

    auto* c_estimate = app.add_subcommand("estimate", "Latency/throughput proxies plus area, power and cost");
    c_estimate->add_option("design", design, "design file")->required();
    c_estimate->add_flag("--edges", edges, "include per-link bandwidth and flow");
    c_estimate->add_option("-o,--output", out_path, "write JSON here instead of stdout");

    auto* c_report = app.add_subcommand("report", "Area, power and per-chiplet cost breakdown");
    c_report->add_option("design", design, "design file")->required();
    c_report->add_option("-o,--output", out_path, "write JSON here instead of stdout");

    auto* c_generate = app.add_subcommand("generate", "Materialize one design point into input files");
    c_generate->add_option("fragment", experiment_path, "design-point JSON")->required();
    c_generate->add_option("-o,--output", out_path, "output directory")->required();

    auto* c_simulate = app.add_subcommand("simulate", "Run the flit-level simulator");
    c_simulate->add_option("design", design, "design file")->required();
    auto* o_rate = c_simulate->add_option("--rate", rate, "injection rate, flits/chiplet/cycle");
    auto* o_sat = c_simulate->add_flag("--saturation", saturation, "search the saturation rate");
    auto* o_trace = c_simulate->add_flag("--trace", trace, "replay the design's trace");
    o_rate->excludes(o_sat)->excludes(o_trace);
    o_sat->excludes(o_trace);
    c_simulate->add_option("--log", results, "CSV log: probes (--saturation) or samples (--rate)");

    auto* c_sweep = app.add_subcommand("sweep", "Evaluate every point of an experiment");
    c_sweep->add_option("experiment", experiment_path, "experiment JSON")->required();
    c_sweep->add_option("-o,--output", out_path, "output directory")->required();
    c_sweep->add_option("--workers", workers, "worker threads (default: experiment setting)");

    auto* c_pareto = app.add_subcommand("pareto", "Latency/throughput Pareto front of a results table");
    c_pareto->add_option("results", results, "results.csv")->required();
    c_pareto->add_option("--max-area-overhead", max_overhead, "fraction, e.g. 0.05 for 5%");

    auto* c_compare = app.add_subcommand("compare", "Proxy vs. simulator errors and speedups");
    c_compare->add_option("results", results, "results.csv")->required();

    auto* c_render = app.add_subcommand("render", "Draw a design as SVG");
    c_render->add_option("design", design, "design file")->required();
    c_render->add_option("-o,--output", out_path, "SVG file")->required();

    auto* c_plot = app.add_subcommand("plotdata", "Reshape results for plotting");
    c_plot->add_option("results", results, "CSV input")->required();
    c_plot->add_option("--kind", kind, "latency_vs_load or pareto_scatter")->required();
    c_plot->add_option("-o,--output", out_path, "write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (c_validate->parsed()) {
            load_valid(design);
            std::cout << design << ": valid\n";
        } else if (c_estimate->parsed()) {
            DesignBundle b = load_valid(design);
            emit(to_json(estimate(b), edges).dump(2) + "\n", out_path);
        } else if (c_report->parsed()) {
            DesignBundle b = load_valid(design);
            AreaReport area = area_report(b);
            json doc = {{"chiplet_area_mm2", area.chiplet_area_sum_mm2},
                        {"interposer_area_mm2", area.interposer_area_mm2},
                        {"power_w", power_report(b)}};
            try {
                CostBreakdown cost = cost_report(b);
                json lines = json::array();
                for (const auto& l : cost.per_chiplet)
                    lines.push_back({{"chiplet", l.chiplet},
                                     {"area_mm2", l.area_mm2},
                                     {"yield", l.yield},
                                     {"dies_per_wafer", l.dies_per_wafer},
                                     {"die_cost", l.die_cost},
                                     {"instances", l.instances}});
                doc["cost"] = {{"per_chiplet", lines},
                               {"packaging_cost", cost.packaging_cost},
                               {"total_cost", cost.total_cost}};
            } catch (const ModelError& e) {
                doc["cost"] = nullptr;
                doc["cost_error"] = e.what();
            }
            emit(doc.dump(2) + "\n", out_path);
        } else if (c_generate->parsed()) {
            json doc = load_json(experiment_path);
            netgen::DesignPoint p;
            try {
                p = dse::design_point_from_json(doc);
            } catch (const InputError& e) {
                throw InvalidInput(experiment_path + ": " + e.where() + ": " + e.message());
            }
            DesignBundle b = netgen::build_design(p);
            ValidationReport report = validate(b);
            if (!report.empty()) throw std::runtime_error("generated design is invalid: " + format_violation(report[0]));
            std::cout << save_design(b, out_path).string() << "\n";
        } else if (c_simulate->parsed()) {
            DesignBundle b = load_valid(design);
            SimParams params = b.simulator.value_or(SimParams{});
            json doc;
            if (trace) {
                if (!b.trace) throw InvalidInput(design + ": design has no trace");
                doc = sim_json(flitsim::replay_trace(b, b.routing_table, *b.trace, params));
            } else if (saturation) {
                flitsim::SearchResult r = flitsim::saturation_throughput(b, b.routing_table, b.traffic, params);
                doc["saturation_rate"] = r.rate;
                doc["probes"] = json::array();
                for (const auto& s : r.steps)
                    doc["probes"].push_back({{"rate", s.rate}, {"saturated", s.saturated},
                                             {"avg_latency_cycles", s.avg_latency_cycles},
                                             {"reason", s.reason}});
                if (!r.warning.empty()) {
                    doc["warning"] = r.warning;
                    std::cerr << "warning: " << r.warning << "\n";
                }
                if (!results.empty()) {
                    std::ostringstream os;
                    flitsim::write_search_log(os, r);
                    emit(os.str(), results);
                }
            } else {
                if (rate < 0.0) throw InvalidInput("simulate needs --rate R, --saturation or --trace");
                flitsim::SimResult r = flitsim::simulate(b, b.routing_table, b.traffic, rate, params);
                doc = sim_json(r);
                if (!results.empty()) {
                    std::ostringstream os;
                    flitsim::write_sample_log(os, r);
                    emit(os.str(), results);
                }
            }
            std::cout << doc.dump(2) << "\n";
        } else if (c_sweep->parsed()) {
            json doc = load_json(experiment_path);
            dse::Experiment e;
            try {
                e = dse::experiment_from_json(doc);
            } catch (const InputError& err) {
                throw InvalidInput(experiment_path + ": " + err.where() + ": " + err.message());
            }
            if (workers >= 0) e.workers = workers;
            dse::RunOptions opts;
            int64_t last_pct = -1;
            opts.progress = [&](int64_t done, int64_t total) {
                int64_t pct = total ? done * 100 / total : 100;
                if (pct != last_pct && pct % 10 == 0) std::cerr << "sweep: " << done << "/" << total << "\n";
                last_pct = pct;
            };
            auto rows = dse::run_experiments(e, out_path, opts);
            std::cout << dse::summary_json(rows).dump(2) << "\n";
        } else if (c_pareto->parsed()) {
            auto rows = read_rows(results);
            std::vector<dse::ResultRow> front;
            for (std::size_t i : dse::pareto_front(rows, max_overhead)) front.push_back(rows[i]);
            std::ostringstream os;
            dse::write_results(os, front);
            std::cout << os.str();
        } else if (c_compare->parsed()) {
            auto rows = read_rows(results);
            auto cmp = dse::compare_proxy_vs_sim(rows);
            csv::write_row(std::cout, {"index", "traffic", "valid", "latency_error", "throughput_error",
                                       "latency_speedup", "throughput_speedup"});
            for (const auto& c : cmp)
                csv::write_row(std::cout, {std::to_string(c.index), c.traffic, c.valid ? "1" : "0",
                                           std::to_string(c.latency_error), std::to_string(c.throughput_error),
                                           std::to_string(c.latency_speedup), std::to_string(c.throughput_speedup)});
            for (const auto& s : dse::summarize(cmp))
                std::cerr << s.traffic << ": rows " << s.rows << ", mean latency error " << 100 * s.mean_latency_error
                          << "%, mean throughput error " << 100 * s.mean_throughput_error << "%, latency speedup "
                          << s.mean_latency_speedup << "x, throughput speedup " << s.mean_throughput_speedup << "x\n";
        } else if (c_render->parsed()) {
            DesignBundle b = load_valid(design);
            emit(render_svg(b), out_path);
        } else if (c_plot->parsed()) {
            csv::Table t = read_table(results);
            if (t.rows.empty()) throw InvalidInput(results + ": no rows");
            csv::Table data;
            try {
                data = plot_data(t, parse_plot_kind(kind));
            } catch (const ModelError& e) {
                throw InvalidInput(results + ": " + e.what());
            }
            emit(csv_text(data), out_path);
        }
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
