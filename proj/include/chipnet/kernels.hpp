#pragma once

// Data-parallel inner loops of the proxies.
//
// Every kernel has a scalar reference implementation and vector variants
// (AVX2 on x86-64, NEON on AArch64). The variant is picked once at startup
// from the CPU's capabilities; `force_isa` overrides it for equivalence tests.
//
// min_ratio and link_lengths are bit-identical across variants. weighted_sum
// reorders additions, so variants agree to rounding only (exactly when all
// partial sums are representable).

#include <cstddef>
#include <span>

#include "chipnet/model.hpp"

namespace chipnet::kernels {

enum class Isa { scalar, avx2, neon };

const char* to_string(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
// Throws ModelError when the CPU or the build lacks `isa`.
void force_isa(Isa isa);
void reset_isa();

struct WeightedSum {
    double weighted = 0.0;  // sum of weights[i] * values[i]
    double weight = 0.0;    // sum of weights[i]
};

struct MinRatio {
    double ratio = 0.0;
    std::ptrdiff_t index = -1;  // -1 when no denominator is positive
};

WeightedSum weighted_sum(std::span<const double> weights, std::span<const double> values);

// min over i with denom[i] > 0 of numer[i] / denom[i]; ties resolve to the lowest index.
MinRatio min_ratio(std::span<const double> numer, std::span<const double> denom);

// out[i] = |ax-bx| + |ay-by| (manhattan) or sqrt(dx*dx + dy*dy) (direct).
void link_lengths(std::span<const double> ax, std::span<const double> ay, std::span<const double> bx,
                  std::span<const double> by, LinkRouting rule, std::span<double> out);

// out[i] = base[i] + scale * lengths[i]
void affine(std::span<const double> base, double scale, std::span<const double> lengths, std::span<double> out);

// Per-variant entry points; each exists only where the build supports it.
namespace scalar {
WeightedSum weighted_sum(const double* w, const double* v, std::size_t n);
MinRatio min_ratio(const double* num, const double* den, std::size_t n);
void link_lengths(const double* ax, const double* ay, const double* bx, const double* by, bool manhattan,
                  double* out, std::size_t n);
void affine(const double* base, double scale, const double* len, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
WeightedSum weighted_sum(const double* w, const double* v, std::size_t n);
MinRatio min_ratio(const double* num, const double* den, std::size_t n);
void link_lengths(const double* ax, const double* ay, const double* bx, const double* by, bool manhattan,
                  double* out, std::size_t n);
void affine(const double* base, double scale, const double* len, double* out, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
WeightedSum weighted_sum(const double* w, const double* v, std::size_t n);
MinRatio min_ratio(const double* num, const double* den, std::size_t n);
void link_lengths(const double* ax, const double* ay, const double* bx, const double* by, bool manhattan,
                  double* out, std::size_t n);
void affine(const double* base, double scale, const double* len, double* out, std::size_t n);
}  // namespace neon
#endif

}  // namespace chipnet::kernels
