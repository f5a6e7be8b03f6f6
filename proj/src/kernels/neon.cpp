// AArch64 variant. Two double lanes; same lane bookkeeping as the AVX2 path.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "chipnet/kernels.hpp"

namespace chipnet::kernels::neon {

WeightedSum weighted_sum(const double* w, const double* v, std::size_t n) {
    float64x2_t acc_wv = vdupq_n_f64(0.0);
    float64x2_t acc_w = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t wv = vld1q_f64(w + i);
        acc_wv = vaddq_f64(acc_wv, vmulq_f64(wv, vld1q_f64(v + i)));
        acc_w = vaddq_f64(acc_w, wv);
    }
    WeightedSum out{vgetq_lane_f64(acc_wv, 0) + vgetq_lane_f64(acc_wv, 1),
                    vgetq_lane_f64(acc_w, 0) + vgetq_lane_f64(acc_w, 1)};
    for (; i < n; ++i) {
        out.weighted += w[i] * v[i];
        out.weight += w[i];
    }
    return out;
}

MinRatio min_ratio(const double* num, const double* den, std::size_t n) {
    const float64x2_t inf = vdupq_n_f64(std::numeric_limits<double>::infinity());
    const float64x2_t zero = vdupq_n_f64(0.0);
    float64x2_t best = inf;
    int64x2_t best_idx = vdupq_n_s64(-1);
    int64_t init[2] = {0, 1};
    int64x2_t cur_idx = vld1q_s64(init);
    const int64x2_t step = vdupq_n_s64(2);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t nv = vld1q_f64(num + i);
        float64x2_t dv = vld1q_f64(den + i);
        uint64x2_t positive = vcgtq_f64(dv, zero);
        float64x2_t r = vbslq_f64(positive, vdivq_f64(nv, dv), inf);
        uint64x2_t lt = vcltq_f64(r, best);
        best = vbslq_f64(lt, r, best);
        best_idx = vbslq_s64(lt, cur_idx, best_idx);
        cur_idx = vaddq_s64(cur_idx, step);
    }
    double lane_best[2];
    int64_t lane_idx[2];
    vst1q_f64(lane_best, best);
    vst1q_s64(lane_idx, best_idx);
    MinRatio out{std::numeric_limits<double>::infinity(), -1};
    for (int l = 0; l < 2; ++l) {
        if (lane_idx[l] < 0) continue;
        if (lane_best[l] < out.ratio || (lane_best[l] == out.ratio && lane_idx[l] < out.index)) {
            out.ratio = lane_best[l];
            out.index = static_cast<std::ptrdiff_t>(lane_idx[l]);
        }
    }
    for (; i < n; ++i) {
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
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t dx = vsubq_f64(vld1q_f64(ax + i), vld1q_f64(bx + i));
        float64x2_t dy = vsubq_f64(vld1q_f64(ay + i), vld1q_f64(by + i));
        float64x2_t r = manhattan ? vaddq_f64(vabsq_f64(dx), vabsq_f64(dy))
                                  : vsqrtq_f64(vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy)));
        vst1q_f64(out + i, r);
    }
    for (; i < n; ++i) {
        double dx = ax[i] - bx[i];
        double dy = ay[i] - by[i];
        out[i] = manhattan ? std::fabs(dx) + std::fabs(dy) : std::sqrt(dx * dx + dy * dy);
    }
}

void affine(const double* base, double scale, const double* len, double* out, std::size_t n) {
    const float64x2_t s = vdupq_n_f64(scale);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(base + i), vmulq_f64(s, vld1q_f64(len + i))));
    for (; i < n; ++i) out[i] = base[i] + scale * len[i];
}

}  // namespace chipnet::kernels::neon

#endif
