#include <algorithm>
#include <numeric>
#include <random>

#include "chipnet/netgen.hpp"

namespace chipnet::netgen {

namespace {

void shuffle(std::vector<int>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace

Traffic generate_traffic(TrafficPattern pattern, int rows, int cols, uint64_t seed, const TrafficOptions& options) {
    if (rows < 1 || cols < 1) throw GeneratorError("grid dimensions must be positive");
    const int n = rows * cols;
    if (n < 2) throw GeneratorError("traffic needs at least two chiplets");
    Traffic t;
    std::mt19937_64 rng(seed);

    switch (pattern) {
        case TrafficPattern::uniform:
            for (int s = 0; s < n; ++s)
                for (int d = 0; d < n; ++d)
                    if (s != d) t.entries.push_back({s, d, 1.0});
            break;
        case TrafficPattern::transpose:
            if (rows != cols) throw GeneratorError("transpose traffic needs a square grid");
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    if (r != c) t.entries.push_back({r * cols + c, c * cols + r, 1.0});
            break;
        case TrafficPattern::permutation: {
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            // Rejection sampling keeps the derangement uniform.
            for (;;) {
                shuffle(perm, rng);
                bool fixed = false;
                for (int i = 0; i < n && !fixed; ++i) fixed = perm[i] == i;
                if (!fixed) break;
            }
            for (int s = 0; s < n; ++s) t.entries.push_back({s, perm[s], 1.0});
            break;
        }
        case TrafficPattern::hotspot: {
            const int k = options.hotspot_count;
            const double share = options.hotspot_share;
            if (k < 1 || k >= n)
                throw GeneratorError("hotspot count must be in [1, " + std::to_string(n - 1) + "], got " +
                                     std::to_string(k));
            if (!(share > 0.0 && share < 1.0)) throw GeneratorError("hotspot share must be in (0, 1)");
            std::vector<int> nodes(n);
            std::iota(nodes.begin(), nodes.end(), 0);
            shuffle(nodes, rng);
            std::vector<char> hot(n, 0);
            for (int i = 0; i < k; ++i) hot[nodes[i]] = 1;
            // Non-hotspot destinations get 1 per source; hotspot pairs are scaled
            // so they carry exactly `share` of the total.
            const double background_pairs = static_cast<double>(n - k) * (n - 1);
            const double hot_pairs = static_cast<double>(k) * (n - 1);
            const double hot_amount = share / (1.0 - share) * background_pairs / hot_pairs;
            for (int s = 0; s < n; ++s)
                for (int d = 0; d < n; ++d)
                    if (s != d) t.entries.push_back({s, d, hot[d] ? hot_amount : 1.0});
            break;
        }
    }
    return t;
}

}  // namespace chipnet::netgen
