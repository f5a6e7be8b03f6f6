#pragma once

// Cycle-level, flit-level reference simulator.
//
// Every node (chiplet or interposer router) is an input-queued router with a
// 4-stage pipeline (route, VC allocation, switch allocation, crossbar). Port 0
// is the local port; ports 1..deg follow the node's incident links in link order.
//
// Timing (no contention): a head flit written into an input VC at cycle t may
// win VC allocation at t + 1 + x, switch allocation one cycle later, and lands
// in the downstream buffer at grant + 2 + D. x = max(0, ceil(w) - 3) where w is
// the node's vertex weight; D = ceil(link cycles) + ceil(PHY cycles) per
// chiplet end. A packet delivered by the ejection port at grant + 2, so each
// node costs max(4, ceil(w) + 1) cycles and each link D cycles.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "chipnet/model.hpp"

namespace chipnet::flitsim {

struct Sample {
    int64_t cycle = 0;
    int64_t backlog_packets = 0;  // created but not yet delivered
    int64_t delivered_packets = 0;
};

struct SimResult {
    double avg_packet_latency_cycles = 0.0;
    double offered_rate = 0.0;   // flits/node/cycle
    double accepted_rate = 0.0;  // flits/node/cycle over the measurement window
    int64_t delivered_packets = 0;
    bool saturated = false;
    std::string saturation_reason;  // latency, backlog, drain or deadlock
    int64_t makespan_cycles = 0;    // trace replay: cycle of the last delivery
    int64_t cycles_simulated = 0;
    std::vector<Sample> samples;
};

class DeadlockError : public ModelError {
public:
    DeadlockError(int64_t cycle, std::vector<std::string> blocked);
    int64_t cycle() const { return cycle_; }
    const std::vector<std::string>& blocked_vcs() const { return blocked_; }

private:
    int64_t cycle_;
    std::vector<std::string> blocked_;
};

// Per-node pipeline extra and per-link delay used by the simulator.
std::vector<int> vertex_extra_cycles(const DesignBundle& bundle);
std::vector<int> link_delay_cycles(const DesignBundle& bundle);

// Effective measurement window: params.measurement_cycles, or 1000 + 100 |V| when 0.
int64_t measurement_window(const SimParams& params, int node_count);

// Synthetic workload: each chiplet injects Bernoulli packets at `rate`
// flits/node/cycle scaled by its share of the traffic weights; destinations
// follow the weights. Throws DeadlockError when the watchdog fires.
SimResult simulate(const DesignBundle& bundle, const RoutingTable& table, const Traffic& traffic, double rate,
                   const SimParams& params);

// Average packet latency at 0.001 flits/node/cycle, with the window stretched
// to about 2000 measured packets.
double zero_load_latency(const DesignBundle& bundle, const RoutingTable& table, const Traffic& traffic,
                         const SimParams& params);

SimResult replay_trace(const DesignBundle& bundle, const RoutingTable& table, const Trace& trace,
                       const SimParams& params);

struct SearchStep {
    double rate = 0.0;
    bool saturated = false;
    double avg_latency_cycles = 0.0;  // 0 when the probe did not simulate
    double accepted_rate = 0.0;
    std::string reason;
};

struct SearchResult {
    double rate = 0.0;  // highest non-saturated rate probed
    std::vector<SearchStep> steps;
    std::string warning;
};

// Coarse-to-fine search over rates in 10%, 1% and 0.1% steps. `saturates`
// answers one probe; rates never exceed max_rate.
SearchResult saturation_search(const std::function<bool(double)>& saturates, double max_rate = 1.0);
// Same protocol with a probe that reports full statistics.
SearchResult saturation_search(const std::function<SearchStep(double)>& probe, double max_rate);

// Search driven by simulate(); deadlocks count as saturation. Rates are capped
// at the injection bandwidth of one flit per injection VC per cycle.
SearchResult saturation_throughput(const DesignBundle& bundle, const RoutingTable& table, const Traffic& traffic,
                                   const SimParams& params);

void write_search_log(std::ostream& out, const SearchResult& result);
void write_sample_log(std::ostream& out, const SimResult& result);

}  // namespace chipnet::flitsim
