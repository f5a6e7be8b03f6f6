// Built with -mavx2 (no FMA) so products and sums round exactly like the scalar path.

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "chipnet/kernels.hpp"

namespace chipnet::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

}  // namespace

WeightedSum weighted_sum(const double* w, const double* v, std::size_t n) {
    __m256d acc_wv = _mm256_setzero_pd();
    __m256d acc_w = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d wv = _mm256_loadu_pd(w + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        acc_wv = _mm256_add_pd(acc_wv, _mm256_mul_pd(wv, vv));
        acc_w = _mm256_add_pd(acc_w, wv);
    }
    WeightedSum out{hsum(acc_wv), hsum(acc_w)};
    for (; i < n; ++i) {
        out.weighted += w[i] * v[i];
        out.weight += w[i];
    }
    return out;
}

MinRatio min_ratio(const double* num, const double* den, std::size_t n) {
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    const __m256d zero = _mm256_setzero_pd();
    __m256d best = inf;
    __m256i best_idx = _mm256_set1_epi64x(-1);
    __m256i cur_idx = _mm256_setr_epi64x(0, 1, 2, 3);
    const __m256i step = _mm256_set1_epi64x(4);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d nv = _mm256_loadu_pd(num + i);
        __m256d dv = _mm256_loadu_pd(den + i);
        __m256d positive = _mm256_cmp_pd(dv, zero, _CMP_GT_OQ);
        __m256d r = _mm256_blendv_pd(inf, _mm256_div_pd(nv, dv), positive);
        __m256d lt = _mm256_cmp_pd(r, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, r, lt);
        best_idx = _mm256_castpd_si256(
            _mm256_blendv_pd(_mm256_castsi256_pd(best_idx), _mm256_castsi256_pd(cur_idx), lt));
        cur_idx = _mm256_add_epi64(cur_idx, step);
    }

    alignas(32) double lane_best[4];
    alignas(32) int64_t lane_idx[4];
    _mm256_store_pd(lane_best, best);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lane_idx), best_idx);

    MinRatio out{std::numeric_limits<double>::infinity(), -1};
    for (int l = 0; l < 4; ++l) {
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
    const __m256d sign = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(ax + i), _mm256_loadu_pd(bx + i));
        __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ay + i), _mm256_loadu_pd(by + i));
        __m256d r;
        if (manhattan) {
            r = _mm256_add_pd(_mm256_andnot_pd(sign, dx), _mm256_andnot_pd(sign, dy));
        } else {
            r = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
        }
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) {
        double dx = ax[i] - bx[i];
        double dy = ay[i] - by[i];
        out[i] = manhattan ? std::fabs(dx) + std::fabs(dy) : std::sqrt(dx * dx + dy * dy);
    }
}

void affine(const double* base, double scale, const double* len, double* out, std::size_t n) {
    const __m256d s = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_add_pd(_mm256_loadu_pd(base + i), _mm256_mul_pd(s, _mm256_loadu_pd(len + i)));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = base[i] + scale * len[i];
}

}  // namespace chipnet::kernels::avx2
