#include <algorithm>
#include <limits>
#include <random>
#include <unordered_set>

#include "chipnet/netgen.hpp"

namespace chipnet::netgen {

namespace {

struct Neighbor {
    int node;
    int link;
};

using Adjacency = std::vector<std::vector<Neighbor>>;

Adjacency build_adjacency(int node_count, const std::vector<NodePair>& links) {
    Adjacency adj(node_count);
    for (int i = 0; i < static_cast<int>(links.size()); ++i) {
        auto [a, b] = links[i];
        if (a < 0 || b < 0 || a >= node_count || b >= node_count || a == b)
            throw GeneratorError("link " + std::to_string(i) + " has an invalid endpoint");
        adj[a].push_back({b, i});
        adj[b].push_back({a, i});
    }
    for (auto& list : adj)
        std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) {
            return x.node != y.node ? x.node < y.node : x.link < y.link;
        });
    return adj;
}

// Directed channel over link i: 2i runs first -> second, 2i+1 the reverse.
int channel(const std::vector<NodePair>& links, int link, int from) {
    return 2 * link + (links[link].first == from ? 0 : 1);
}

int channel_head(const std::vector<NodePair>& links, int ch) {
    const auto& l = links[ch / 2];
    return ch % 2 == 0 ? l.second : l.first;
}

uint64_t turn_key(int in, int out) { return (static_cast<uint64_t>(in) << 32) | static_cast<uint32_t>(out); }

uint64_t draw_below(std::mt19937_64& rng, uint64_t n) { return rng() % n; }

void bfs(const Adjacency& adj, int dst, std::vector<int>& dist, std::vector<int>& queue) {
    dist.assign(adj.size(), -1);
    queue.clear();
    queue.push_back(dst);
    dist[dst] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int n = queue[head];
        for (const auto& nb : adj[n]) {
            if (dist[nb.node] >= 0) continue;
            dist[nb.node] = dist[n] + 1;
            queue.push_back(nb.node);
        }
    }
}

}  // namespace

std::vector<int> bfs_distances(int node_count, const std::vector<NodePair>& links, int dst) {
    if (dst < 0 || dst >= node_count) throw GeneratorError("BFS root out of range");
    std::vector<int> dist, queue;
    bfs(build_adjacency(node_count, links), dst, dist, queue);
    return dist;
}

RoutingTable generate_routing_table(const std::vector<NodePair>& links, int node_count, int chiplet_count,
                                    RoutingAlgorithm algorithm, uint64_t seed) {
    if (chiplet_count < 1 || chiplet_count > node_count) throw GeneratorError("invalid chiplet count");
    Adjacency adj = build_adjacency(node_count, links);
    RoutingTable table;
    table.next_hop.resize(node_count);

    auto unreachable = [](int n, int d) {
        return GeneratorError("no route from node " + std::to_string(n) + " to chiplet " + std::to_string(d));
    };

    if (algorithm == RoutingAlgorithm::lowest_id) {
        std::vector<int> dist, queue;
        for (int d = 0; d < chiplet_count; ++d) {
            bfs(adj, d, dist, queue);
            for (int n = 0; n < node_count; ++n) {
                if (n == d) continue;
                if (dist[n] < 0) throw unreachable(n, d);
                // Adjacency is sorted by node id, so the first hit is the lowest.
                for (const auto& nb : adj[n]) {
                    if (dist[nb.node] == dist[n] - 1) {
                        table.next_hop[n].emplace_hint(table.next_hop[n].end(), d, nb.link);
                        break;
                    }
                }
            }
        }
        return table;
    }

    // Up*/down* over a breadth-first labelling from node 0: a hop is "up" when
    // it moves to a lower label. Legal routes climb first and then descend
    // (no down->up turn), which keeps the channel dependency graph acyclic and
    // every pair connected. Per destination, nodes with a descending route use
    // a shortest one; the others climb along a shortest legal route. Ties are
    // broken uniformly at random.
    std::vector<int> label(node_count, -1), order;
    {
        std::vector<int> dist;
        bfs(adj, 0, dist, order);
        for (int i = 0; i < static_cast<int>(order.size()); ++i) label[order[i]] = i;
        if (static_cast<int>(order.size()) != node_count)
            for (int n = 0; n < node_count; ++n)
                if (label[n] < 0) throw unreachable(n, 0);
    }
    constexpr int kInf = std::numeric_limits<int>::max() / 2;
    std::mt19937_64 rng(seed);
    std::vector<int> down(node_count), legal(node_count);
    std::vector<int> candidates;
    for (int d = 0; d < chiplet_count; ++d) {
        // Descending distance, filled from the highest label down.
        std::fill(down.begin(), down.end(), kInf);
        down[d] = 0;
        for (int i = node_count - 1; i >= 0; --i) {
            int n = order[i];
            for (const auto& nb : adj[n])
                if (label[nb.node] > i && down[nb.node] + 1 < down[n]) down[n] = down[nb.node] + 1;
        }
        // Legal distance: climbing nodes depend only on lower labels.
        for (int i = 0; i < node_count; ++i) {
            int n = order[i];
            legal[n] = down[n];
            if (down[n] < kInf) continue;
            for (const auto& nb : adj[n])
                if (label[nb.node] < i && legal[nb.node] + 1 < legal[n]) legal[n] = legal[nb.node] + 1;
        }
        for (int n = 0; n < node_count; ++n) {
            if (n == d) continue;
            candidates.clear();
            const bool descend = down[n] < kInf;
            for (const auto& nb : adj[n]) {
                bool ok = descend ? label[nb.node] > label[n] && down[nb.node] == down[n] - 1
                                  : label[nb.node] < label[n] && legal[nb.node] == legal[n] - 1;
                if (ok) candidates.push_back(nb.link);
            }
            table.next_hop[n].emplace_hint(table.next_hop[n].end(), d,
                                           candidates[draw_below(rng, candidates.size())]);
        }
    }
    return table;
}

std::vector<NodePair> dependency_cycle(const RoutingTable& table, const std::vector<NodePair>& links,
                                       int node_count, int chiplet_count) {
    int channels = static_cast<int>(links.size()) * 2;
    std::vector<std::vector<int>> deps(channels);
    std::unordered_set<uint64_t> seen;
    std::vector<char> on_route(node_count);

    auto next_of = [&](int n, int d) -> int {
        if (n < 0 || n >= static_cast<int>(table.next_hop.size())) return -1;
        auto it = table.next_hop[n].find(d);
        return it == table.next_hop[n].end() ? -1 : it->second;
    };
    auto other_end = [&](int link, int n) { return links[link].first == n ? links[link].second : links[link].first; };

    for (int d = 0; d < chiplet_count; ++d) {
        std::fill(on_route.begin(), on_route.end(), 0);
        for (int s = 0; s < chiplet_count; ++s) {
            int n = s;
            int prev_ch = -1;
            for (int steps = 0; n != d && steps <= node_count; ++steps) {
                int link = next_of(n, d);
                if (link < 0 || link >= static_cast<int>(links.size())) break;
                int ch = channel(links, link, n);
                if (prev_ch >= 0 && seen.insert(turn_key(prev_ch, ch)).second) deps[prev_ch].push_back(ch);
                if (on_route[n]) break;  // the remainder was already recorded
                on_route[n] = 1;
                prev_ch = ch;
                n = other_end(link, n);
            }
        }
    }

    std::vector<char> color(channels, 0);
    struct Frame {
        int ch;
        std::size_t next;
    };
    for (int root = 0; root < channels; ++root) {
        if (color[root]) continue;
        std::vector<Frame> stack{{root, 0}};
        color[root] = 1;
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next == deps[f.ch].size()) {
                color[f.ch] = 2;
                stack.pop_back();
                continue;
            }
            int succ = deps[f.ch][f.next++];
            if (color[succ] == 0) {
                color[succ] = 1;
                stack.push_back({succ, 0});
            } else if (color[succ] == 1) {
                std::vector<NodePair> cycle;
                auto it = std::find_if(stack.begin(), stack.end(), [&](const Frame& x) { return x.ch == succ; });
                for (; it != stack.end(); ++it) {
                    int c = it->ch;
                    int head = channel_head(links, c);
                    int tail = c % 2 == 0 ? links[c / 2].first : links[c / 2].second;
                    cycle.push_back({tail, head});
                }
                return cycle;
            }
        }
    }
    return {};
}

}  // namespace chipnet::netgen
