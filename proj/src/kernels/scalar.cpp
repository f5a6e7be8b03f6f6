#include <cmath>
#include <limits>

#include "chipnet/kernels.hpp"

namespace chipnet::kernels::scalar {

WeightedSum weighted_sum(const double* w, const double* v, std::size_t n) {
    WeightedSum out;
    for (std::size_t i = 0; i < n; ++i) {
        out.weighted += w[i] * v[i];
        out.weight += w[i];
    }
    return out;
}

MinRatio min_ratio(const double* num, const double* den, std::size_t n) {
    MinRatio out{std::numeric_limits<double>::infinity(), -1};
    for (std::size_t i = 0; i < n; ++i) {
        if (!(den[i] > 0.0)) continue;
        double r = num[i] / den[i];
        if (r < out.ratio) {
            out.ratio = r;
            out.index = static_cast<std::ptrdiff_t>(i);
        }
    }
    return out;
}

void link_lengths(const double* ax, const double* ay, const double* bx, const double* by, bool manhattan,
                  double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double dx = ax[i] - bx[i];
        double dy = ay[i] - by[i];
        out[i] = manhattan ? std::fabs(dx) + std::fabs(dy) : std::sqrt(dx * dx + dy * dy);
    }
}

void affine(const double* base, double scale, const double* len, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + scale * len[i];
}

}  // namespace chipnet::kernels::scalar
