#include <algorithm>
#include <set>

#include "chipnet/netgen.hpp"

namespace chipnet::netgen {

namespace {

class LinkSet {
public:
    void add(int a, int b) {
        if (a == b) return;
        links_.insert({std::min(a, b), std::max(a, b)});
    }
    std::vector<NodePair> sorted() const { return {links_.begin(), links_.end()}; }

private:
    std::set<NodePair> links_;
};

void check_grid(int rows, int cols) {
    if (rows < 1 || cols < 1) throw GeneratorError("grid dimensions must be positive");
}

// Neighbor links along one line of `n` nodes whose ids are start + i * stride.
void line_mesh(LinkSet& out, int start, int stride, int n) {
    for (int i = 0; i + 1 < n; ++i) out.add(start + i * stride, start + (i + 1) * stride);
}

void line_ring(LinkSet& out, int start, int stride, int n) {
    line_mesh(out, start, stride, n);
    if (n > 2) out.add(start, start + (n - 1) * stride);
}

// Interleaved ring: logical ring order 0, 2, 4, ..., 5, 3, 1, so no physical
// link spans more than two grid steps.
void line_folded_ring(LinkSet& out, int start, int stride, int n) {
    if (n < 3) {
        line_mesh(out, start, stride, n);
        return;
    }
    for (int i = 0; i + 2 < n; ++i) out.add(start + i * stride, start + (i + 2) * stride);
    out.add(start, start + stride);
    out.add(start + (n - 2) * stride, start + (n - 1) * stride);
}

void line_all_to_all(LinkSet& out, int start, int stride, int n) {
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.add(start + i * stride, start + j * stride);
}

template <class LineFn>
void per_line(LinkSet& out, int rows, int cols, LineFn fn) {
    for (int r = 0; r < rows; ++r) fn(out, r * cols, 1, cols);
    for (int c = 0; c < cols; ++c) fn(out, c, cols, rows);
}

}  // namespace

std::vector<NodePair> generate_topology(TopologyKind kind, int rows, int cols) {
    check_grid(rows, cols);
    LinkSet out;
    switch (kind) {
        case TopologyKind::mesh: per_line(out, rows, cols, line_mesh); break;
        case TopologyKind::torus: per_line(out, rows, cols, line_ring); break;
        case TopologyKind::folded_torus: per_line(out, rows, cols, line_folded_ring); break;
        case TopologyKind::flattened_butterfly: per_line(out, rows, cols, line_all_to_all); break;
        case TopologyKind::hypercube: {
            int n = rows * cols;
            if (n < 2 || (n & (n - 1)) != 0)
                throw GeneratorError("hypercube needs a power-of-two node count, got " + std::to_string(n));
            for (int i = 0; i < n; ++i)
                for (int bit = 1; bit < n; bit <<= 1) out.add(i, i ^ bit);
            break;
        }
        case TopologyKind::hexamesh: {
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    int id = r * cols + c;
                    if (c + 1 < cols) out.add(id, id + 1);
                    if (r + 1 >= rows) continue;
                    // Odd rows sit half a pitch to the right.
                    int lo = (r % 2 == 0) ? c - 1 : c;
                    for (int cc = lo; cc <= lo + 1; ++cc)
                        if (cc >= 0 && cc < cols) out.add(id, (r + 1) * cols + cc);
                }
            }
            break;
        }
        case TopologyKind::shg:
            throw GeneratorError("shg topologies need a bit vector; use generate_shg");
    }
    return out.sorted();
}

std::vector<NodePair> generate_shg(int rows, int cols, const std::vector<bool>& bits) {
    if (rows < 3 || cols < 3) throw GeneratorError("shg needs at least 3 rows and 3 columns");
    if (static_cast<int>(bits.size()) != rows + cols - 4)
        throw GeneratorError("shg on " + std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
                             std::to_string(rows + cols - 4) + " bits, got " + std::to_string(bits.size()));
    bool all = std::all_of(bits.begin(), bits.end(), [](bool b) { return b; });
    auto row_upgraded = [&](int r) { return (r == 0 || r == rows - 1) ? all : bits[r - 1]; };
    auto col_upgraded = [&](int c) { return (c == 0 || c == cols - 1) ? all : bits[rows - 2 + c - 1]; };

    LinkSet out;
    for (int r = 0; r < rows; ++r) {
        if (row_upgraded(r)) {
            line_all_to_all(out, r * cols, 1, cols);
        } else {
            line_mesh(out, r * cols, 1, cols);
        }
    }
    for (int c = 0; c < cols; ++c) {
        if (col_upgraded(c)) {
            line_all_to_all(out, c, cols, rows);
        } else {
            line_mesh(out, c, cols, rows);
        }
    }
    return out.sorted();
}

std::vector<bool> shg_bits_from_index(uint64_t index, int rows, int cols) {
    int n = rows + cols - 4;
    if (n < 0 || n > 63) throw GeneratorError("unsupported shg grid");
    std::vector<bool> bits(n);
    for (int i = 0; i < n; ++i) bits[i] = (index >> i) & 1u;
    return bits;
}

std::string shg_bits_to_string(const std::vector<bool>& bits) {
    std::string s;
    for (bool b : bits) s += b ? '1' : '0';
    return s;
}

}  // namespace chipnet::netgen
