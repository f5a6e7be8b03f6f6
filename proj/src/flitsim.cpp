#include "chipnet/flitsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <random>

#include "chipnet/proxy.hpp"

namespace chipnet::flitsim {

namespace {

constexpr int64_t kNever = std::numeric_limits<int64_t>::max() / 4;

struct Flit {
    int32_t packet = 0;
    int32_t dst = 0;
    bool head = false;
    bool tail = false;
    int64_t arrival = 0;
};

struct InVc {
    std::deque<Flit> buf;
    int out_port = -1;  // set by VC allocation
    int out_vc = -1;
    int64_t va_ready = kNever;
    int64_t sa_ready = kNever;
};

struct OutVc {
    bool busy = false;
    int credits = 0;
};

struct Port {
    int link = -1;  // -1 for the local port
    int peer = -1;
    int peer_port = -1;
    int delay = 0;
    std::vector<InVc> in;
    std::vector<OutVc> out;
    int va_rr = 0;      // output side: next input VC slot to favour
    int sa_in_rr = 0;   // input side: next VC to favour
    int sa_out_rr = 0;  // output side: next input slot to favour
};

struct Router {
    std::vector<Port> ports;
    std::vector<int> route_port;  // destination chiplet -> output port
    int extra = 0;
    int buffered = 0;
    std::deque<Flit> source;  // unbounded source queue (chiplets only)
    int inject_vc = -1;       // injection VC of the packet currently entering
};

struct Event {
    enum Kind : uint8_t { arrival, credit } kind;
    int node;
    int port;
    int vc;
    Flit flit;
};

struct Packet {
    int64_t created = 0;
    int64_t delivered = -1;
    int src = 0;
    int dst = 0;
    int size = 1;
    bool measured = false;
};

class Network {
public:
    Network(const DesignBundle& bundle, const RoutingTable& table, const SimParams& params)
        : params_(params) {
        if (params.vcs_per_port < 1 || params.buffer_flits_per_vc < 1 || params.packet_size_flits < 1)
            throw ModelError("simulator counts must be at least 1");
        const int n = bundle.placement.node_count();
        chiplets_ = bundle.placement.chiplet_count();
        routers_.resize(n);
        std::vector<int> extra = vertex_extra_cycles(bundle);
        std::vector<int> delay = link_delay_cycles(bundle);
        int max_delay = 0;
        for (int v = 0; v < n; ++v) {
            routers_[v].extra = extra[v];
            routers_[v].ports.resize(1);
        }
        const auto& links = bundle.topology.links;
        auto node_of = [&](const Endpoint& e) {
            return e.kind == EndpointKind::chiplet ? e.index : chiplets_ + e.index;
        };
        for (int i = 0; i < static_cast<int>(links.size()); ++i) {
            int a = node_of(links[i].a), b = node_of(links[i].b);
            int pa = static_cast<int>(routers_[a].ports.size());
            int pb = static_cast<int>(routers_[b].ports.size());
            routers_[a].ports.push_back(Port{i, b, pb, delay[i], {}, {}});
            routers_[b].ports.push_back(Port{i, a, pa, delay[i], {}, {}});
            max_delay = std::max(max_delay, delay[i]);
        }
        for (auto& r : routers_) {
            for (auto& p : r.ports) {
                p.in.resize(params.vcs_per_port);
                p.out.assign(params.vcs_per_port, OutVc{false, params.buffer_flits_per_vc});
            }
        }
        for (int v = 0; v < n; ++v) {
            auto& r = routers_[v];
            r.route_port.assign(chiplets_, 0);
            for (int d = 0; d < chiplets_; ++d) {
                if (d == v) continue;
                const bool has_row = v < static_cast<int>(table.next_hop.size());
                auto it = has_row ? table.next_hop[v].find(d) : std::map<int, int>::const_iterator{};
                if (!has_row || it == table.next_hop[v].end())
                    throw ModelError("routing table has no entry at node " + std::to_string(v) + " for " +
                                     std::to_string(d));
                int port = -1;
                for (int p = 1; p < static_cast<int>(r.ports.size()); ++p)
                    if (r.ports[p].link == it->second) port = p;
                if (port < 0)
                    throw ModelError("routing table sends node " + std::to_string(v) + " over non-incident link " +
                                     std::to_string(it->second));
                r.route_port[d] = port;
            }
        }
        wheel_.resize(static_cast<std::size_t>(max_delay) + 4);
        stuck_limit_ = 10 * static_cast<int64_t>(n);
        for (const auto& r : routers_) stuck_limit_ = std::max<int64_t>(stuck_limit_, r.extra + 2);
    }

    int chiplets() const { return chiplets_; }
    int node_count() const { return static_cast<int>(routers_.size()); }
    int64_t now() const { return now_; }
    std::vector<Packet>& packets() { return packets_; }
    int64_t delivered_count() const { return delivered_; }
    int64_t flits_delivered_in(int64_t from, int64_t to) const {
        int64_t c = 0;
        for (int64_t t : delivery_log_)
            if (t >= from && t < to) ++c;
        return c;
    }

    int add_packet(int src, int dst, int size) {
        int id = static_cast<int>(packets_.size());
        packets_.push_back({now_, -1, src, dst, size, false});
        auto& q = routers_[src].source;
        for (int f = 0; f < size; ++f) q.push_back({id, dst, f == 0, f == size - 1, now_});
        queued_ += size;
        return id;
    }

    // One cycle; returns ids of packets whose tail was delivered (delivery
    // cycle recorded in the packet).
    void step(std::vector<int>& finished) {
        bool progress = false;
        auto& bucket = wheel_[now_ % wheel_.size()];
        for (const Event& e : bucket) {
            progress = true;
            --in_flight_;
            if (e.kind == Event::credit) {
                ++routers_[e.node].ports[e.port].out[e.vc].credits;
                continue;
            }
            --flits_in_flight_;
            Flit f = e.flit;
            f.arrival = now_;
            push_flit(e.node, e.port, e.vc, f);
        }
        bucket.clear();

        for (int v = 0; v < chiplets_; ++v) progress |= inject(v);

        for (int v = 0; v < node_count(); ++v) {
            if (routers_[v].buffered == 0) continue;
            progress |= allocate_vcs(v);
        }
        for (int v = 0; v < node_count(); ++v) {
            if (routers_[v].buffered == 0) continue;
            progress |= allocate_switch(v, finished);
        }

        if (progress || in_flight_ > 0 || buffered_ == 0) {
            stuck_ = 0;
        } else if (++stuck_ > stuck_limit_) {
            throw DeadlockError(now_, blocked_vcs());
        }
        ++now_;
    }

    // Injected flits = delivered + buffered + on a link.
    void check_conservation() const {
        const int64_t delivered = static_cast<int64_t>(delivery_log_.size());
        if (flits_injected_ != delivered + buffered_ + flits_in_flight_)
            throw ModelError("internal: flit conservation violated at cycle " + std::to_string(now_));
    }

    bool idle() const { return buffered_ == 0 && in_flight_ == 0 && queued_ == 0; }

    // Skips empty cycles; only legal while idle.
    void advance_to(int64_t cycle) {
        if (idle() && cycle > now_) now_ = cycle;
    }

private:
    void push_flit(int node, int port, int vc, const Flit& f) {
        Router& r = routers_[node];
        InVc& ivc = r.ports[port].in[vc];
        if (static_cast<int>(ivc.buf.size()) >= params_.buffer_flits_per_vc)
            throw ModelError("internal: input buffer overflow");
        ivc.buf.push_back(f);
        if (ivc.buf.size() == 1 && f.head) ivc.va_ready = now_ + 1 + r.extra;
        ++r.buffered;
        ++buffered_;
    }

    // Moves source-queue flits into injection VCs: one flit per VC per cycle,
    // a packet's flits all use the VC its head entered.
    bool inject(int v) {
        Router& r = routers_[v];
        if (r.source.empty()) return false;
        bool moved = false;
        auto& local = r.ports[0];
        std::vector<char> used(local.in.size(), 0);
        while (!r.source.empty()) {
            const Flit& f = r.source.front();
            int vc = -1;
            if (f.head) {
                for (int k = 0; k < static_cast<int>(local.in.size()); ++k) {
                    const InVc& c = local.in[k];
                    if (used[k] || static_cast<int>(c.buf.size()) >= params_.buffer_flits_per_vc) continue;
                    if (!c.buf.empty() || c.out_port >= 0) continue;  // one packet per injection VC
                    vc = k;
                    break;
                }
            } else {
                vc = r.inject_vc;
                if (used[vc] || static_cast<int>(local.in[vc].buf.size()) >= params_.buffer_flits_per_vc) vc = -1;
            }
            if (vc < 0) break;
            used[vc] = 1;
            Flit g = f;
            g.arrival = now_;
            r.source.pop_front();
            --queued_;
            r.inject_vc = vc;
            ++flits_injected_;
            push_flit(v, 0, vc, g);
            moved = true;
        }
        return moved;
    }

    bool allocate_vcs(int v) {
        Router& r = routers_[v];
        const int vcs = params_.vcs_per_port;
        const int ports = static_cast<int>(r.ports.size());
        bool any = false;
        // Route every ready head; ejection needs no VC.
        requests_.assign(ports, {});
        for (int p = 0; p < ports; ++p) {
            for (int k = 0; k < vcs; ++k) {
                InVc& c = r.ports[p].in[k];
                if (c.out_port >= 0 || c.buf.empty() || c.va_ready > now_) continue;
                const Flit& f = c.buf.front();
                int out = f.dst == v ? 0 : r.route_port[f.dst];
                if (out == 0) {
                    c.out_port = 0;
                    c.out_vc = 0;
                    c.sa_ready = now_ + 1;
                    any = true;
                } else {
                    requests_[out].push_back(p * vcs + k);
                }
            }
        }
        for (int o = 1; o < ports; ++o) {
            auto& reqs = requests_[o];
            if (reqs.empty()) continue;
            Port& op = r.ports[o];
            const int slots = ports * vcs;
            std::sort(reqs.begin(), reqs.end(), [&](int a, int b) {
                return (a - op.va_rr + slots) % slots < (b - op.va_rr + slots) % slots;
            });
            int ovc = 0;
            for (int slot : reqs) {
                while (ovc < vcs && op.out[ovc].busy) ++ovc;
                if (ovc == vcs) break;
                InVc& c = r.ports[slot / vcs].in[slot % vcs];
                op.out[ovc].busy = true;
                c.out_port = o;
                c.out_vc = ovc;
                c.sa_ready = now_ + 1;
                op.va_rr = (slot + 1) % slots;
                any = true;
            }
        }
        return any;
    }

    bool sa_eligible(const Router& r, const InVc& c) const {
        if (c.out_port < 0 || c.buf.empty() || c.sa_ready > now_) return false;
        if (c.buf.front().arrival >= now_) return false;
        if (c.out_port == 0) return true;
        return r.ports[c.out_port].out[c.out_vc].credits > 0;
    }

    bool allocate_switch(int v, std::vector<int>& finished) {
        Router& r = routers_[v];
        const int vcs = params_.vcs_per_port;
        const int ports = static_cast<int>(r.ports.size());
        // Input stage. Each injection VC is its own input; link ports pick one VC.
        winners_.clear();
        for (int k = 0; k < vcs; ++k)
            if (sa_eligible(r, r.ports[0].in[k])) winners_.push_back(k);
        for (int p = 1; p < ports; ++p) {
            Port& ip = r.ports[p];
            for (int i = 0; i < vcs; ++i) {
                int k = (ip.sa_in_rr + i) % vcs;
                if (sa_eligible(r, ip.in[k])) {
                    winners_.push_back(p * vcs + k);
                    break;
                }
            }
        }
        if (winners_.empty()) return false;

        // Output stage: ejection takes everything, link outputs one flit each.
        const int slots = ports * vcs;
        granted_.clear();
        requests_.assign(ports, {});
        for (int slot : winners_) {
            const InVc& c = r.ports[slot / vcs].in[slot % vcs];
            if (c.out_port == 0) {
                granted_.push_back(slot);
            } else {
                requests_[c.out_port].push_back(slot);
            }
        }
        for (int o = 1; o < ports; ++o) {
            auto& reqs = requests_[o];
            if (reqs.empty()) continue;
            Port& op = r.ports[o];
            int best = reqs[0];
            for (int s : reqs)
                if ((s - op.sa_out_rr + slots) % slots < (best - op.sa_out_rr + slots) % slots) best = s;
            op.sa_out_rr = (best + 1) % slots;
            granted_.push_back(best);
        }

        for (int slot : granted_) {
            int p = slot / vcs, k = slot % vcs;
            Port& ip = r.ports[p];
            InVc& c = ip.in[k];
            Flit f = c.buf.front();
            c.buf.pop_front();
            --r.buffered;
            --buffered_;
            if (p > 0) {
                ip.sa_in_rr = (k + 1) % vcs;
                schedule(now_ + 1 + ip.delay, {Event::credit, ip.peer, ip.peer_port, k, {}});
            }
            if (c.out_port == 0) {
                deliver(f, now_ + 2, finished);
            } else {
                Port& op = r.ports[c.out_port];
                --op.out[c.out_vc].credits;
                schedule(now_ + 2 + op.delay, {Event::arrival, op.peer, op.peer_port, c.out_vc, f});
                ++flits_in_flight_;
                if (f.tail) op.out[c.out_vc].busy = false;
            }
            if (f.tail) {
                c.out_port = -1;
                c.out_vc = -1;
                c.sa_ready = kNever;
                c.va_ready = c.buf.empty() ? kNever : std::max(c.buf.front().arrival + 1 + r.extra, now_ + 1);
            }
        }
        return true;
    }

    void deliver(const Flit& f, int64_t cycle, std::vector<int>& finished) {
        delivery_log_.push_back(cycle);
        if (!f.tail) return;
        packets_[f.packet].delivered = cycle;
        ++delivered_;
        finished.push_back(f.packet);
    }

    void schedule(int64_t cycle, const Event& e) {
        wheel_[cycle % wheel_.size()].push_back(e);
        ++in_flight_;
    }

    std::vector<std::string> blocked_vcs() const {
        std::vector<std::string> out;
        for (int v = 0; v < node_count(); ++v) {
            const Router& r = routers_[v];
            for (int p = 0; p < static_cast<int>(r.ports.size()); ++p) {
                for (int k = 0; k < static_cast<int>(r.ports[p].in.size()); ++k) {
                    const InVc& c = r.ports[p].in[k];
                    if (c.buf.empty()) continue;
                    std::string s = "node " + std::to_string(v) + " port " + std::to_string(p) + " vc " +
                                    std::to_string(k) + " (" + std::to_string(c.buf.size()) + " flits, head for " +
                                    std::to_string(c.buf.front().dst) + ")";
                    out.push_back(std::move(s));
                }
            }
        }
        return out;
    }

    SimParams params_;
    int chiplets_ = 0;
    std::vector<Router> routers_;
    std::vector<std::vector<Event>> wheel_;
    std::vector<Packet> packets_;
    std::vector<int64_t> delivery_log_;
    std::vector<std::vector<int>> requests_;
    std::vector<int> winners_;
    std::vector<int> granted_;
    int64_t now_ = 0;
    int64_t in_flight_ = 0;
    int64_t flits_in_flight_ = 0;
    int64_t flits_injected_ = 0;
    int64_t buffered_ = 0;
    int64_t queued_ = 0;
    int64_t delivered_ = 0;
    int64_t stuck_ = 0;
    int64_t stuck_limit_ = 0;
};

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Injector {
    std::vector<double> node_rate;                // packets/cycle
    std::vector<std::vector<int>> dst;            // per source
    std::vector<std::vector<double>> cumulative;  // per source, cumulative weights

    Injector(const Traffic& traffic, int chiplets, double rate, int packet_size) {
        node_rate.assign(chiplets, 0.0);
        dst.resize(chiplets);
        cumulative.resize(chiplets);
        double total = 0.0;
        for (const auto& e : traffic.entries) {
            if (e.amount <= 0.0) continue;
            total += e.amount;
            double prev = cumulative[e.src].empty() ? 0.0 : cumulative[e.src].back();
            dst[e.src].push_back(e.dst);
            cumulative[e.src].push_back(prev + e.amount);
        }
        if (!(total > 0.0)) throw ModelError("traffic has no positive entries");
        for (int s = 0; s < chiplets; ++s) {
            double share = cumulative[s].empty() ? 0.0 : cumulative[s].back() / total;
            node_rate[s] = rate * chiplets * share / packet_size;
        }
    }

    int draw_dst(int s, std::mt19937_64& rng) const {
        const auto& c = cumulative[s];
        double u = unit(rng) * c.back();
        auto it = std::upper_bound(c.begin(), c.end(), u);
        if (it == c.end()) --it;
        return dst[s][it - c.begin()];
    }
};

double proxy_latency(const DesignBundle& bundle, const RoutingTable& table, const Traffic& traffic) {
    return evaluate_proxies(build_ici_graph(bundle), table, traffic).avg_latency_cycles;
}

}  // namespace

DeadlockError::DeadlockError(int64_t cycle, std::vector<std::string> blocked)
    : ModelError([&] {
          std::string msg = "deadlock at cycle " + std::to_string(cycle) + ": no flit moved; blocked VCs:";
          for (std::size_t i = 0; i < blocked.size() && i < 8; ++i) msg += (i ? "; " : " ") + blocked[i];
          if (blocked.size() > 8) msg += "; ... (" + std::to_string(blocked.size()) + " total)";
          return msg;
      }()),
      cycle_(cycle),
      blocked_(std::move(blocked)) {}

std::vector<int> vertex_extra_cycles(const DesignBundle& bundle) {
    const int chiplets = bundle.placement.chiplet_count();
    std::vector<int> out(bundle.placement.node_count());
    for (int v = 0; v < static_cast<int>(out.size()); ++v) {
        double w = v < chiplets ? bundle.chiplet_of(v).internal_latency_cycles
                                : bundle.packaging.router_latency_cycles;
        out[v] = std::max(0, static_cast<int>(std::ceil(w)) - 3);
    }
    return out;
}

std::vector<int> link_delay_cycles(const DesignBundle& bundle) {
    IciGraph g = build_ici_graph(bundle);
    std::vector<int> out;
    out.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        int d = static_cast<int>(std::ceil(e.link_cycles));
        for (const auto& end : e.ends)
            if (end.is_chiplet) d += static_cast<int>(std::ceil(bundle.chiplet_of(end.node).phy_latency_cycles));
        out.push_back(d);
    }
    return out;
}

int64_t measurement_window(const SimParams& params, int node_count) {
    return params.measurement_cycles > 0 ? params.measurement_cycles : 1000 + 100 * int64_t{node_count};
}

SimResult simulate(const DesignBundle& bundle, const RoutingTable& table, const Traffic& traffic, double rate,
                   const SimParams& params) {
    if (!(rate >= 0.0)) throw ModelError("injection rate must be non-negative");
    if (params.latency_saturation_factor <= 1.0) throw ModelError("latency saturation factor must exceed 1");
    Network net(bundle, table, params);
    Injector inj(traffic, net.chiplets(), rate, params.packet_size_flits);
    std::mt19937_64 rng(params.seed);

    const int64_t warmup = params.warmup_cycles;
    const int64_t window = measurement_window(params, net.node_count());
    const int64_t end = warmup + window;
    const int64_t drain_end = end + params.drain_cycle_limit;
    const int samples = 10;

    SimResult res;
    res.offered_rate = rate;
    int64_t measured_total = 0, measured_done = 0;
    double latency_sum = 0.0;
    std::vector<int> finished;
    auto& packets = net.packets();
    int64_t created = 0;

    while (true) {
        const int64_t t = net.now();
        if (t >= end && measured_done == measured_total) break;
        if (t >= drain_end) {
            res.saturated = true;
            res.saturation_reason = "drain";
            break;
        }
        for (int s = 0; s < net.chiplets(); ++s) {
            double lambda = inj.node_rate[s];
            if (lambda <= 0.0) continue;
            int64_t count = static_cast<int64_t>(lambda);
            if (unit(rng) < lambda - static_cast<double>(count)) ++count;
            for (int64_t i = 0; i < count; ++i) {
                int id = net.add_packet(s, inj.draw_dst(s, rng), params.packet_size_flits);
                ++created;
                if (t >= warmup && t < end) {
                    packets[id].measured = true;
                    ++measured_total;
                }
            }
        }
        finished.clear();
        net.step(finished);
        for (int id : finished) {
            if (!packets[id].measured) continue;
            ++measured_done;
            latency_sum += static_cast<double>(packets[id].delivered - packets[id].created);
        }
        if (t >= warmup && t < end && (t - warmup + 1) % (window / samples > 0 ? window / samples : 1) == 0 &&
            static_cast<int>(res.samples.size()) < samples) {
            net.check_conservation();
            res.samples.push_back({t, created - net.delivered_count(), net.delivered_count()});
        }
    }

    res.cycles_simulated = net.now();
    res.delivered_packets = measured_done;
    res.avg_packet_latency_cycles = measured_done ? latency_sum / static_cast<double>(measured_done) : 0.0;
    res.accepted_rate = static_cast<double>(net.flits_delivered_in(warmup, end)) /
                        (static_cast<double>(net.chiplets()) * static_cast<double>(window));
    if (!res.saturated) {
        double bound = params.latency_saturation_factor * proxy_latency(bundle, table, traffic);
        if (measured_done && res.avg_packet_latency_cycles > bound) {
            res.saturated = true;
            res.saturation_reason = "latency";
        }
    }
    if (!res.saturated && res.samples.size() >= 2) {
        bool growing = true;
        for (std::size_t i = 1; i < res.samples.size() && growing; ++i)
            growing = res.samples[i].backlog_packets > res.samples[i - 1].backlog_packets;
        if (growing) {
            res.saturated = true;
            res.saturation_reason = "backlog";
        }
    }
    return res;
}

double zero_load_latency(const DesignBundle& bundle, const RoutingTable& table, const Traffic& traffic,
                         const SimParams& params) {
    constexpr double rate = 0.001;
    SimParams p = params;
    const int chiplets = bundle.placement.chiplet_count();
    const int64_t target =
        static_cast<int64_t>(std::ceil(2000.0 * params.packet_size_flits / (rate * std::max(chiplets, 1))));
    p.measurement_cycles = std::max(measurement_window(params, bundle.placement.node_count()), target);
    SimResult r = simulate(bundle, table, traffic, rate, p);
    if (r.delivered_packets == 0) throw ModelError("zero-load run delivered no packets");
    return r.avg_packet_latency_cycles;
}

SimResult replay_trace(const DesignBundle& bundle, const RoutingTable& table, const Trace& trace,
                       const SimParams& params) {
    Network net(bundle, table, params);
    const auto& msgs = trace.messages;
    const std::size_t m = msgs.size();

    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return msgs[a].id < msgs[b].id; });
    std::map<int64_t, std::size_t> index_of;
    for (std::size_t i = 0; i < m; ++i) index_of[msgs[i].id] = i;

    std::vector<int> pending_deps(m, 0);
    std::vector<std::vector<std::size_t>> dependents(m);
    std::vector<int64_t> eligible(m);
    for (std::size_t i = 0; i < m; ++i) {
        eligible[i] = std::max<int64_t>(0, msgs[i].earliest_injection_cycle);
        for (int64_t d : msgs[i].deps) {
            auto it = index_of.find(d);
            if (it == index_of.end()) throw ModelError("message " + std::to_string(msgs[i].id) + " depends on unknown id");
            dependents[it->second].push_back(i);
            ++pending_deps[i];
        }
    }

    std::map<int, std::size_t> message_of_packet;
    std::size_t done = 0;
    SimResult res;
    double latency_sum = 0.0;
    std::vector<int> finished;
    std::vector<std::size_t> ready;  // dependency-free, not yet injected, sorted by id position
    std::vector<std::size_t> rank(m);
    for (std::size_t i = 0; i < m; ++i) rank[order[i]] = i;
    for (std::size_t i : order)
        if (pending_deps[i] == 0) ready.push_back(i);

    while (done < m) {
        const int64_t t = net.now();
        // Inject every message whose time has come, in id order.
        std::vector<std::size_t> keep;
        for (std::size_t i : ready) {
            if (eligible[i] <= t) {
                int id = net.add_packet(msgs[i].src, msgs[i].dst, std::max(1, msgs[i].size_flits));
                message_of_packet[id] = i;
            } else {
                keep.push_back(i);
            }
        }
        ready.swap(keep);
        finished.clear();
        net.step(finished);
        for (int id : finished) {
            std::size_t i = message_of_packet.at(id);
            const Packet& p = net.packets()[id];
            latency_sum += static_cast<double>(p.delivered - p.created);
            res.makespan_cycles = std::max(res.makespan_cycles, p.delivered);
            ++done;
            for (std::size_t j : dependents[i]) {
                eligible[j] = std::max(eligible[j], p.delivered + 1);
                if (--pending_deps[j] == 0) {
                    auto pos = std::lower_bound(ready.begin(), ready.end(), j,
                                                [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
                    ready.insert(pos, j);
                }
            }
        }
        if (done < m && net.idle()) {
            if (ready.empty()) throw ModelError("trace has unsatisfiable dependencies");
            int64_t next = eligible[ready.front()];
            for (std::size_t i : ready) next = std::min(next, eligible[i]);
            net.advance_to(next);
        }
    }
    res.cycles_simulated = net.now();
    res.delivered_packets = static_cast<int64_t>(done);
    res.avg_packet_latency_cycles = m ? latency_sum / static_cast<double>(m) : 0.0;
    return res;
}

SearchResult saturation_search(const std::function<bool(double)>& saturates, double max_rate) {
    return saturation_search(
        std::function<SearchStep(double)>([&](double rate) { return SearchStep{rate, saturates(rate), 0.0, 0.0, ""}; }),
        max_rate);
}

SearchResult saturation_search(const std::function<SearchStep(double)>& run, double max_rate) {
    // Rates are handled in integer tenths of a percent so probes are exact.
    SearchResult res;
    auto probe = [&](int permille) {
        SearchStep step = run(permille / 1000.0);
        step.rate = permille / 1000.0;
        res.steps.push_back(step);
        return step.saturated;
    };
    const int limit = static_cast<int>(std::floor(max_rate * 1000.0 + 1e-9));
    int stable = 0;
    int saturated_at = limit + 1;
    const int steps[] = {100, 10, 1};
    for (int step : steps) {
        for (int r = stable + step; r < saturated_at && r <= limit; r += step) {
            if (probe(r)) {
                saturated_at = r;
                break;
            }
            stable = r;
        }
        if (stable == 0 && saturated_at == 100) {
            res.warning = "saturated at the first probed rate (10%); reporting 0";
            break;
        }
    }
    res.rate = stable / 1000.0;
    return res;
}

SearchResult saturation_throughput(const DesignBundle& bundle, const RoutingTable& table, const Traffic& traffic,
                                   const SimParams& params) {
    std::function<SearchStep(double)> probe = [&](double rate) {
        try {
            SimResult r = simulate(bundle, table, traffic, rate, params);
            return SearchStep{rate, r.saturated, r.avg_packet_latency_cycles, r.accepted_rate, r.saturation_reason};
        } catch (const DeadlockError&) {
            return SearchStep{rate, true, 0.0, 0.0, "deadlock"};
        }
    };
    return saturation_search(probe, static_cast<double>(params.vcs_per_port));
}

void write_search_log(std::ostream& out, const SearchResult& result) {
    out << "probe,rate,saturated,avg_latency_cycles,accepted_rate,reason\n";
    for (std::size_t i = 0; i < result.steps.size(); ++i) {
        const SearchStep& s = result.steps[i];
        out << i << ',' << s.rate << ',' << (s.saturated ? 1 : 0) << ',' << s.avg_latency_cycles << ','
            << s.accepted_rate << ',' << s.reason << '\n';
    }
}

void write_sample_log(std::ostream& out, const SimResult& result) {
    out << "cycle,backlog_packets,delivered_packets\n";
    for (const auto& s : result.samples)
        out << s.cycle << ',' << s.backlog_packets << ',' << s.delivered_packets << '\n';
}

}  // namespace chipnet::flitsim
